#include "nfscale/rebalance.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "nfscale/error.hpp"

namespace nfscale {

namespace {

constexpr double kProfileTolerance = 1e-9;

double clamped(std::uint64_t bytes) noexcept {
  return static_cast<double>(std::max<std::uint64_t>(bytes, 1));
}

void validate_profile(const WeightProfile& p) {
  if (p.probs.empty()) throw Error(Errc::InvalidArgument, "empty weight profile");
  for (const auto& [id, prob] : p.probs) {
    if (!std::isfinite(prob) || prob < 0.0) {
      throw Error(Errc::InvalidArgument, "bad probability for chain " + id.to_string());
    }
  }
  if (std::abs(p.sum() - 1.0) > kProfileTolerance) {
    throw Error(Errc::InvalidArgument, "profile sums to " + std::to_string(p.sum()));
  }
}

// T restricted to the chains of the profile; draining chains do not count.
std::uint64_t profile_total(const WeightProfile& p, const TrafficWindow& t) {
  std::uint64_t sum = 0;
  for (const auto& [id, prob] : p.probs) sum += t.at(id);
  return sum;
}

void validate_inputs(const WeightProfile& p, const TrafficWindow& t) {
  validate_profile(p);
  if (profile_total(p, t) == 0) throw Error(Errc::EmptyWindow, "window carried no traffic");
  for (const auto& [id, prob] : p.probs) {
    if (prob == 0.0) throw Error(Errc::ZeroProbability, "chain " + id.to_string());
  }
}

// sum over chains (except `skip`) of p_j / t_j
double inverse_load(const WeightProfile& p, const TrafficWindow& t, const ChainId* skip) {
  double acc = 0.0;
  for (const auto& [id, prob] : p.probs) {
    if (skip && id == *skip) continue;
    acc += prob / clamped(t.at(id));
  }
  return acc;
}

}  // namespace

std::uint64_t TrafficWindow::total() const noexcept {
  std::uint64_t sum = 0;
  for (const auto& [id, b] : bytes) sum += b;
  return sum;
}

std::uint64_t TrafficWindow::at(const ChainId& id) const noexcept {
  auto it = bytes.find(id);
  return it == bytes.end() ? 0 : it->second;
}

void merge_into(TrafficWindow& into, const TrafficWindow& other) {
  into.length_s = std::max(into.length_s, other.length_s);
  for (const auto& [id, b] : other.bytes) into.bytes[id] += b;
}

double WeightProfile::sum() const noexcept {
  double s = 0.0;
  for (const auto& [id, p] : probs) s += p;
  return s;
}

WeightProfile WeightProfile::uniform(const std::vector<ChainId>& chains) {
  WeightProfile p;
  for (const auto& id : chains) p.probs[id] = 1.0 / static_cast<double>(chains.size());
  return p;
}

BiasVector bias(const WeightProfile& p, const TrafficWindow& t) {
  validate_inputs(p, t);
  const double total = static_cast<double>(profile_total(p, t));
  BiasVector out;
  for (const auto& [id, prob] : p.probs) out.biases[id] = clamped(t.at(id)) / (total * prob);
  return out;
}

WeightProfile redistribute(const WeightProfile& p, const TrafficWindow& t) {
  validate_inputs(p, t);
  const double norm = inverse_load(p, t, nullptr);
  WeightProfile out;
  for (const auto& [id, prob] : p.probs) out.probs[id] = prob / (clamped(t.at(id)) * norm);
  return out;
}

WeightProfile add_chain(const WeightProfile& p, const TrafficWindow& t, const ChainId& new_id) {
  if (p.contains(new_id)) throw Error(Errc::DuplicateChain, new_id.to_string());
  WeightProfile out = redistribute(p, t);
  const double n = static_cast<double>(p.size());
  for (auto& [id, prob] : out.probs) prob *= n / (n + 1.0);
  out.probs[new_id] = 1.0 / (n + 1.0);
  return out;
}

WeightProfile remove_chain(const WeightProfile& p, const TrafficWindow& t, const ChainId& victim) {
  if (!p.contains(victim)) throw Error(Errc::UnknownChain, victim.to_string());
  if (p.size() < 2) throw Error(Errc::LastChain, "cannot remove " + victim.to_string());
  validate_profile(p);
  if (profile_total(p, t) == 0) throw Error(Errc::EmptyWindow, "window carried no traffic");
  for (const auto& [id, prob] : p.probs) {
    if (id != victim && prob == 0.0) throw Error(Errc::ZeroProbability, "chain " + id.to_string());
  }
  const double norm = inverse_load(p, t, &victim);
  WeightProfile out;
  for (const auto& [id, prob] : p.probs) {
    out.probs[id] = id == victim ? 0.0 : prob / (clamped(t.at(id)) * norm);
  }
  return out;
}

Allocation allocate_buckets(const WeightProfile& p, std::uint32_t buckets) {
  validate_profile(p);
  if (buckets == 0) throw Error(Errc::InvalidArgument, "bucket count must be positive");

  struct Quota {
    ChainId id;
    std::uint32_t count;
    double remainder;
    bool eligible;
  };
  std::vector<Quota> quotas;
  quotas.reserve(p.size());
  std::int64_t assigned = 0;
  for (const auto& [id, prob] : p.probs) {
    const double exact = prob * static_cast<double>(buckets);
    const double whole = std::floor(exact);
    quotas.push_back({id, static_cast<std::uint32_t>(whole), exact - whole, prob > 0.0});
    assigned += static_cast<std::int64_t>(whole);
  }
  std::int64_t leftover = static_cast<std::int64_t>(buckets) - assigned;

  // Map order is ascending ChainId, so a stable sort keeps ties by lower tag first.
  std::vector<std::size_t> order(quotas.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return quotas[a].remainder > quotas[b].remainder;
  });
  const auto eligible = std::count_if(quotas.begin(), quotas.end(), [](const Quota& q) { return q.eligible; });

  while (leftover > 0 && eligible > 0) {
    for (std::size_t idx : order) {
      if (leftover == 0) break;
      if (!quotas[idx].eligible) continue;
      ++quotas[idx].count;
      --leftover;
    }
  }
  // Only reachable if the profile overshoots 1 by more than 1/L.
  for (auto it = order.rbegin(); leftover < 0 && it != order.rend(); ++it) {
    if (quotas[*it].count > 0) {
      --quotas[*it].count;
      ++leftover;
    }
  }

  Allocation out;
  out.reserve(quotas.size());
  for (const auto& q : quotas) out.emplace_back(q.id, q.count);
  return out;
}

}  // namespace nfscale
