#include <doctest.h>

#include <cmath>
#include <random>

#include "nfscale/error.hpp"
#include "nfscale/rebalance.hpp"

using namespace nfscale;

namespace {

const ChainId c1{2, 3};
const ChainId c2{4, 5};
const ChainId c3{6, 7};
const ChainId c4{8, 9};

WeightProfile profile(std::initializer_list<std::pair<ChainId, double>> entries) {
  WeightProfile p;
  for (const auto& [id, v] : entries) p.probs[id] = v;
  return p;
}

TrafficWindow window(std::initializer_list<std::pair<ChainId, std::uint64_t>> entries) {
  TrafficWindow t;
  for (const auto& [id, v] : entries) t.bytes[id] = v;
  return t;
}

Errc code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error thrown");
  return Errc::InvalidArgument;
}

}  // namespace

TEST_CASE("bias") {
  auto b = bias(profile({{c1, 0.5}, {c2, 0.5}}), window({{c1, 200}, {c2, 200}}));
  CHECK(b.biases[c1] == doctest::Approx(1.0));
  CHECK(b.biases[c2] == doctest::Approx(1.0));

  b = bias(profile({{c1, 0.5}, {c2, 0.5}}), window({{c1, 300}, {c2, 100}}));
  CHECK(b.biases[c1] == doctest::Approx(1.5));
  CHECK(b.biases[c2] == doctest::Approx(0.5));

  b = bias(profile({{c1, 1.0}}), window({{c1, 500}}));
  CHECK(b.biases[c1] == doctest::Approx(1.0));

  CHECK(code_of([] { bias(profile({{c1, 0.5}, {c2, 0.5}}), window({{c1, 0}, {c2, 0}})); }) == Errc::EmptyWindow);
  CHECK(code_of([] { bias(profile({{c1, 1.0}, {c2, 0.0}}), window({{c1, 5}, {c2, 5}})); }) ==
        Errc::ZeroProbability);
  CHECK(code_of([] { bias(profile({{c1, 0.7}, {c2, 0.7}}), window({{c1, 5}, {c2, 5}})); }) ==
        Errc::InvalidArgument);
}

TEST_CASE("bias clamps silent chains to one byte") {
  auto b = bias(profile({{c1, 0.5}, {c2, 0.5}}), window({{c1, 100}}));
  CHECK(b.biases[c2] == doctest::Approx(1.0 / 50.0));
  CHECK(b.biases[c2] > 0.0);
}

TEST_CASE("redistribute") {
  auto p = redistribute(profile({{c1, 0.5}, {c2, 0.5}}), window({{c1, 300}, {c2, 100}}));
  CHECK(p.probs[c1] == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(p.probs[c2] == doctest::Approx(0.75).epsilon(1e-15));

  const auto start = profile({{c1, 0.2}, {c2, 0.3}, {c3, 0.5}});
  p = redistribute(start, window({{c1, 777}, {c2, 777}, {c3, 777}}));
  for (const auto& [id, v] : start.probs) CHECK(std::abs(p.probs[id] - v) <= 1e-12);

  p = redistribute(start, window({{c1, 200}, {c2, 300}, {c3, 500}}));
  for (const auto& [id, v] : p.probs) CHECK(std::abs(v - 1.0 / 3.0) <= 1e-12);
}

TEST_CASE("add_chain") {
  auto p = add_chain(profile({{c1, 1.0}}), window({{c1, 1234}}), c2);
  CHECK(p.probs[c1] == 0.5);
  CHECK(p.probs[c2] == 0.5);

  p = add_chain(profile({{c1, 0.5}, {c2, 0.5}}), window({{c1, 300}, {c2, 100}}), c3);
  CHECK(std::abs(p.probs[c1] - 1.0 / 6.0) <= 1e-12);
  CHECK(std::abs(p.probs[c2] - 0.5) <= 1e-12);
  CHECK(p.probs[c3] == 1.0 / 3.0);

  p = add_chain(profile({{c1, 0.5}, {c2, 0.5}}), window({{c1, 200}, {c2, 200}}), c3);
  for (const auto& [id, v] : p.probs) CHECK(std::abs(v - 1.0 / 3.0) <= 1e-12);

  CHECK(code_of([] { add_chain(profile({{c1, 1.0}}), window({{c1, 1}}), c1); }) == Errc::DuplicateChain);
}

TEST_CASE("remove_chain") {
  auto p = remove_chain(profile({{c1, 0.5}, {c2, 0.5}}), window({{c1, 100}, {c2, 100}}), c2);
  CHECK(p.probs[c1] == doctest::Approx(1.0));
  CHECK(p.probs[c2] == 0.0);

  p = remove_chain(profile({{c1, 0.2}, {c2, 0.3}, {c3, 0.5}}), window({{c1, 100}, {c2, 100}, {c3, 100}}), c2);
  CHECK(std::abs(p.probs[c1] - 2.0 / 7.0) <= 1e-12);
  CHECK(p.probs[c2] == 0.0);
  CHECK(std::abs(p.probs[c3] - 5.0 / 7.0) <= 1e-12);

  const double third = 1.0 / 3.0;
  p = remove_chain(profile({{c1, third}, {c2, third}, {c3, 1.0 - 2 * third}}),
                   window({{c1, 300}, {c2, 100}, {c3, 100}}), c1);
  CHECK(p.probs[c1] == 0.0);
  CHECK(std::abs(p.probs[c2] - 0.5) <= 1e-12);
  CHECK(std::abs(p.probs[c3] - 0.5) <= 1e-12);

  CHECK(code_of([] { remove_chain(profile({{c1, 1.0}}), window({{c1, 10}}), c1); }) == Errc::LastChain);
  CHECK(code_of([] { remove_chain(profile({{c1, 1.0}}), window({{c1, 10}}), c2); }) == Errc::UnknownChain);
}

TEST_CASE("remove then add the same chain still sums to one") {
  const auto start = profile({{c1, 0.25}, {c2, 0.25}, {c3, 0.5}});
  const auto t = window({{c1, 100}, {c2, 100}, {c3, 100}});
  auto removed = remove_chain(start, t, c3);
  removed.probs.erase(c3);
  const auto back = add_chain(removed, window({{c1, 100}, {c2, 100}}), c3);
  CHECK(std::abs(back.sum() - 1.0) <= 1e-12);
}

TEST_CASE("allocate_buckets") {
  auto alloc = allocate_buckets(profile({{c1, 0.25}, {c2, 0.75}}), 10);
  CHECK(alloc == Allocation{{c1, 3}, {c2, 7}});

  const double third = 1.0 / 3.0;
  alloc = allocate_buckets(profile({{c1, third}, {c2, third}, {c3, third}}), 9);
  CHECK(alloc == Allocation{{c1, 3}, {c2, 3}, {c3, 3}});

  alloc = allocate_buckets(profile({{c1, 0.5}, {c2, 0.5}, {c3, 0.0}}), 8);
  CHECK(alloc == Allocation{{c1, 4}, {c2, 4}, {c3, 0}});

  alloc = allocate_buckets(profile({{c1, third}, {c2, third}, {c3, third}}), 1024);
  CHECK(alloc == Allocation{{c1, 342}, {c2, 341}, {c3, 341}});

  // Many exact ties: 4 chains x 0.25 over 1023 buckets leaves 3 to hand out.
  alloc = allocate_buckets(profile({{c1, 0.25}, {c2, 0.25}, {c3, 0.25}, {c4, 0.25}}), 1023);
  CHECK(alloc == Allocation{{c1, 256}, {c2, 256}, {c3, 256}, {c4, 255}});
}

TEST_CASE("allocation exactness on random profiles") {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 2000; ++trial) {
    const int n = 1 + static_cast<int>(rng() % 12);
    const std::uint32_t L = 1 + static_cast<std::uint32_t>(rng() % 5000);
    WeightProfile p;
    double sum = 0.0;
    for (int i = 0; i < n; ++i) {
      // Coarse weights produce frequent remainder ties.
      const double w = trial % 2 ? unit(rng) : static_cast<double>(rng() % 4);
      p.probs[ChainId(static_cast<std::uint16_t>(2 + 2 * i), static_cast<std::uint16_t>(3 + 2 * i))] = w;
      sum += w;
    }
    if (sum == 0.0) continue;
    for (auto& [id, v] : p.probs) v /= sum;
    const auto alloc = allocate_buckets(p, L);
    std::uint64_t total = 0;
    for (const auto& [id, count] : alloc) {
      total += count;
      CHECK(std::abs(static_cast<double>(count) - p.probs[id] * L) < 1.0);
      if (p.probs[id] == 0.0) CHECK(count == 0);
    }
    CHECK(total == L);
  }
}

TEST_CASE("merge_into sums per chain") {
  auto a = window({{c1, 300}});
  merge_into(a, window({{c1, 200}, {c2, 5}}));
  CHECK(a.at(c1) == 500);
  CHECK(a.at(c2) == 5);
  CHECK(a.total() == 505);
}
