// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "nfscale/error.hpp"
#include "nfscale/rebalance.hpp"
#include "nfscale/report.hpp"

using namespace nfscale;
namespace fs = std::filesystem;

namespace {

int failures = 0;

void verdict(int n, const std::string& title, bool pass, const std::string& detail) {
  std::printf("%s  criterion %d: %s  [%s]\n", pass ? "PASS" : "FAIL", n, title.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

std::string fmt(double v, int digits = 4) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2e", v);
  return buf;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

const std::vector<std::uint64_t> kSeeds{1, 2, 3, 4, 5};

std::vector<const RunReport*> runs_of(const SuiteReport& suite, const std::string& name) {
  std::vector<const RunReport*> out;
  for (const auto& r : suite.runs) {
    if (r.scenario == name) out.push_back(&r);
  }
  return out;
}

// Mean share per chain across runs in steady interval k.
std::map<ChainId, double> mean_shares(const std::vector<const RunReport*>& runs, std::size_t k) {
  std::map<ChainId, double> out;
  for (const auto* r : runs) {
    for (const auto& [c, v] : r->steady.at(k).shares) out[c] += v / static_cast<double>(runs.size());
  }
  return out;
}

void criterion1() {
  const auto base = bundled_scenario("static-3");
  std::map<ChainId, double> mean;
  double slowest = 0.0;
  bool clean = true;
  for (auto seed : kSeeds) {
    auto f = base;
    f.scenario.seed = seed;
    const auto t0 = std::chrono::steady_clock::now();
    const auto r = evaluate(f, {});
    slowest = std::max(slowest, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    clean = clean && r.clean();
    for (const auto& [c, v] : r.steady.at(0).shares) mean[c] += v / static_cast<double>(kSeeds.size());
  }
  bool pass = clean && mean.size() == 3 && slowest < 30.0;
  std::string detail;
  for (const auto& [c, v] : mean) {
    pass = pass && std::abs(v - 1.0 / 3.0) <= 0.02;
    detail += c.to_string() + "=" + fmt(v) + " ";
  }
  detail += "(5-seed mean, target 0.3333 +- 0.02); slowest run " + fmt(slowest, 2) + " s";
  verdict(1, "static 3-chain balance", pass, detail);
}

void criterion2(const SuiteReport& suite) {
  bool pass = true;
  std::string detail;
  for (const char* name : {"warmup-1to2", "warmup-2to3"}) {
    const auto runs = runs_of(suite, name);
    pass = pass && runs.size() == kSeeds.size();
    detail += std::string(name) + ":";
    for (const auto* r : runs) {
      const auto& ev = r->events.at(0);
      pass = pass && ev.convergence_s && *ev.convergence_s <= 7.0;
      detail += ev.convergence_s ? " " + fmt(*ev.convergence_s, 0) : " never";
    }
    detail += " s; ";
  }
  detail += "limit 7 s, band 10% of 1/N, every seed";
  verdict(2, "warm-up convergence", pass, detail);
}

void criterion3(const SuiteReport& suite) {
  bool pass = true;
  std::string detail;
  for (const auto& [name, n] : std::vector<std::pair<std::string, int>>{{"warmup-1to2", 1}, {"warmup-2to3", 2}}) {
    std::uint32_t fresh = 0;
    std::uint32_t on_new = 0;
    for (const auto* r : runs_of(suite, name)) {
      fresh += r->events.at(0).new_sessions;
      on_new += r->events.at(0).new_on_chain;
    }
    const double got = fresh ? static_cast<double>(on_new) / fresh : 0.0;
    const double want = 1.0 / (n + 1);
    pass = pass && fresh > 0 && std::abs(got - want) <= 0.05;
    detail += "N=" + std::to_string(n) + ": " + fmt(got) + " vs " + fmt(want) + " (" + std::to_string(fresh) +
              " sessions); ";
  }
  detail += "tolerance 0.05, sessions first mapped within 2 s of the commit, 5 seeds pooled";
  verdict(3, "immediate new-session split", pass, detail);
}

void criterion4(const SuiteReport& suite) {
  bool pass = true;
  std::string detail;
  for (const char* name : {"cooldown-2to1", "cooldown-3to2"}) {
    const auto runs = runs_of(suite, name);
    pass = pass && runs.size() == kSeeds.size();
    double worst_drain = 0.0;
    double worst_idle = 0.0;
    double rho = bundled_scenario(name).scenario.cluster.session_timeout_s;
    for (const auto* r : runs) {
      const auto& ev = r->events.at(0);
      const bool ok = ev.drain_s && *ev.drain_s <= 7.0 && ev.idle_after_last_s &&
                      *ev.idle_after_last_s <= rho + 1e-9 && ev.reclaimed_at;
      pass = pass && ok;
      if (ev.drain_s) worst_drain = std::max(worst_drain, *ev.drain_s);
      if (ev.idle_after_last_s) worst_idle = std::max(worst_idle, *ev.idle_after_last_s);
    }
    const auto removed = runs.front()->events.at(0).chain;
    const auto after = mean_shares(runs, runs.front()->steady.size() - 1);
    std::vector<double> survivors;
    for (const auto& [c, v] : after) {
      if (c != removed) survivors.push_back(v);
    }
    std::string split;
    for (double v : survivors) {
      pass = pass && std::abs(v - 1.0 / static_cast<double>(survivors.size())) <= 0.02;
      split += fmt(v) + "/";
    }
    if (!split.empty()) split.pop_back();
    detail += std::string(name) + ": drain <= " + fmt(worst_drain, 0) + " s, idle " + fmt(worst_idle, 2) +
              " s after last packet (rho " + fmt(rho, 0) + "), survivors " + split + "; ";
  }
  detail += "drain limit 7 s every seed, survivor split 5-seed mean +- 0.02";
  verdict(4, "cool-down drain", pass, detail);
}

// Straight-line evaluation of the probability formulas, written from the
// unsimplified forms and accumulated in long double.
using Profile = std::vector<long double>;

Profile oracle_redistribute(const Profile& p, const std::vector<long double>& t, int skip = -1) {
  const auto n = static_cast<long double>(p.size() - (skip >= 0 ? 1 : 0));
  long double total = 0;
  for (std::size_t j = 0; j < p.size(); ++j) total += t[j];
  long double denom = 0;
  for (std::size_t j = 0; j < p.size(); ++j) {
    if (static_cast<int>(j) != skip) denom += p[j] / t[j];
  }
  denom *= total / n;
  Profile out(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    out[i] = static_cast<int>(i) == skip ? 0.0L : (total * p[i] / (n * t[i])) / denom;
  }
  return out;
}

void criterion5() {
  std::mt19937_64 rng(20161016);
  std::uniform_int_distribution<int> size(2, 12);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  double worst = 0.0;
  double worst_sum = 0.0;
  bool exact_new = true;
  bool fixed_point = true;
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = size(rng);
    std::vector<ChainId> ids;
    for (int i = 0; i < n; ++i) {
      ids.emplace_back(static_cast<std::uint16_t>(2 + 2 * i), static_cast<std::uint16_t>(3 + 2 * i));
    }
    WeightProfile p;
    TrafficWindow t;
    Profile pl(n);
    std::vector<long double> tl(n);
    double psum = 0.0;
    std::vector<double> raw(n);
    for (int i = 0; i < n; ++i) psum += raw[i] = 0.05 + unit(rng);
    for (int i = 0; i < n; ++i) {
      p.probs[ids[i]] = raw[i] / psum;
      pl[i] = p.probs[ids[i]];
      const auto bytes = static_cast<std::uint64_t>(1 + unit(rng) * 1e9);
      t.bytes[ids[i]] = bytes;
      tl[i] = static_cast<long double>(bytes);
    }

    auto compare = [&](const WeightProfile& got, const Profile& want) {
      double sum = 0.0;
      for (int i = 0; i < n; ++i) {
        const double g = got.probs.at(ids[i]);
        worst = std::max(worst, std::abs(static_cast<double>(g - want[i])));
        sum += g;
      }
      return sum;
    };

    worst_sum = std::max(worst_sum, std::abs(compare(redistribute(p, t), oracle_redistribute(pl, tl)) - 1.0));

    const ChainId extra(4000, 4001);
    const auto added = add_chain(p, t, extra);
    auto want_add = oracle_redistribute(pl, tl);
    for (auto& v : want_add) v *= static_cast<long double>(n) / (n + 1);
    const double added_sum = compare(added, want_add) + added.probs.at(extra);
    worst_sum = std::max(worst_sum, std::abs(added_sum - 1.0));
    exact_new = exact_new && added.probs.at(extra) == 1.0 / (n + 1);

    const int victim = static_cast<int>(rng() % static_cast<std::uint64_t>(n));
    const auto removed = remove_chain(p, t, ids[victim]);
    worst_sum = std::max(worst_sum, std::abs(compare(removed, oracle_redistribute(pl, tl, victim)) - 1.0));
    exact_new = exact_new && removed.probs.at(ids[victim]) == 0.0;

    // Equal traffic leaves the profile unchanged.
    TrafficWindow flat;
    for (int i = 0; i < n; ++i) flat.bytes[ids[i]] = 1'000'000;
    const auto same = redistribute(p, flat);
    for (int i = 0; i < n; ++i) {
      fixed_point = fixed_point && std::abs(same.probs.at(ids[i]) - p.probs.at(ids[i])) <= 1e-12;
    }
  }
  const bool pass = worst <= 1e-12 && worst_sum <= 1e-12 && exact_new && fixed_point;
  verdict(5, "rebalance algebra against an independent evaluation", pass,
          "1000 instances; max entry error " + sci(worst) + ", max |sum - 1| " + sci(worst_sum) + ", new entry exactly 1/(N+1): " + (exact_new ? "yes" : "no") +
              ", fixed point: " + (fixed_point ? "yes" : "no"));
}

Scenario affinity_scenario(double reversed) {
  Scenario sc;
  sc.name = "affinity";
  sc.seed = 7;
  const ChainId a(2, 3), b(4, 5), c(6, 7), d(8, 9);
  sc.cluster.chains = {a, b};
  sc.standby = {c, d};
  sc.traffic.sessions = 10'000;
  sc.traffic.reversed_fraction = reversed;
  sc.actions = {{15.0, ActionKind::Add, c},       {27.0, ActionKind::Rebalance, {}}, {40.0, ActionKind::Remove, a},
                {52.0, ActionKind::Add, d},       {66.0, ActionKind::Rebalance, {}}, {80.0, ActionKind::Remove, b},
                {95.0, ActionKind::Rebalance, {}}, {110.0, ActionKind::Remove, c}};
  return sc;
}

void criterion6() {
  const auto fwd = run(affinity_scenario(0.0));
  std::size_t single = 0;
  std::size_t agreed = 0;
  for (const auto& s : fwd.sessions) {
    single += s.single_chain;
    agreed += s.agreed;
  }
  const auto rev = run(affinity_scenario(0.01));
  std::size_t reversed = 0;
  std::size_t reversed_agreed = 0;
  std::size_t others_single = 0;
  std::size_t others = 0;
  for (const auto& s : rev.sessions) {
    if (s.reversed) {
      ++reversed;
      reversed_agreed += s.agreed;
    } else {
      ++others;
      others_single += s.single_chain;
    }
  }
  const auto n = fwd.sessions.size();
  const bool pass = n >= 10'000 && single == n && agreed == n && fwd.counters.anomalies == 0 && reversed > 0 &&
                    reversed_agreed == reversed && others_single == others && rev.counters.anomalies == 0;
  verdict(6, "session affinity under add/remove/rebalance", pass,
          std::to_string(n) + " sessions, " + std::to_string(fwd.commits.size()) + " events: single-chain " +
              std::to_string(single) + ", agreed " + std::to_string(agreed) + "; with 1% reversed: " +
              std::to_string(reversed_agreed) + "/" + std::to_string(reversed) + " reversed sessions agreed (" +
              std::to_string(rev.counters.corrected) + " master corrections, " + std::to_string(rev.counters.diverged) +
              " slave divergences), anomalies " +
              std::to_string(fwd.counters.anomalies + rev.counters.anomalies));
}

void criterion7(const SuiteReport& suite, const fs::path& out) {
  std::size_t compared = 0;
  std::size_t identical = 0;
  for (const auto& e : bundled_corpus()) {
    const auto f = bundled_scenario(e.name);
    const auto again = run(f.scenario);
    const auto path = out / (f.scenario.name + "-s" + std::to_string(f.scenario.seed) + ".csv");
    ++compared;
    if (fs::exists(path) && slurp(path) == again.series.to_csv()) ++identical;
  }
  std::size_t equal_vectors = 0;
  std::size_t generations = 0;
  for (const auto& r : suite.runs) {
    equal_vectors += r.buckets_always_equal;
    for (const auto& ev : r.events) generations += ev.ok;
  }
  const bool pass = compared == bundled_corpus().size() && identical == compared && equal_vectors == suite.runs.size();
  verdict(7, "determinism and bucket-vector agreement", pass,
          std::to_string(identical) + "/" + std::to_string(compared) +
              " scenarios re-run to byte-identical CSV; master and slave vectors equal in " +
              std::to_string(equal_vectors) + "/" + std::to_string(suite.runs.size()) + " runs (" +
              std::to_string(generations) + " committed events)");
}

void criterion8() {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> size(1, 16);
  const std::vector<std::uint32_t> sizes{64, 1000, 1024, 4096, 65536};
  std::size_t exact = 0;
  double worst = 0.0;
  for (int trial = 0; trial < 10'000; ++trial) {
    const int n = size(rng);
    const auto L = sizes[rng() % sizes.size()];
    WeightProfile p;
    double sum = 0.0;
    std::vector<double> raw(n);
    for (int i = 0; i < n; ++i) sum += raw[i] = unit(rng) < 0.1 ? 0.0 : unit(rng);
    if (sum == 0.0) sum = raw[0] = 1.0;
    for (int i = 0; i < n; ++i) {
      p.probs[ChainId(static_cast<std::uint16_t>(2 + 2 * i), static_cast<std::uint16_t>(3 + 2 * i))] = raw[i] / sum;
    }
    const auto alloc = allocate_buckets(p, L);
    std::uint64_t total = 0;
    for (const auto& [id, count] : alloc) {
      total += count;
      worst = std::max(worst, std::abs(static_cast<double>(count) - p.probs.at(id) * L));
    }
    exact += total == L;
  }
  verdict(8, "bucket allocation", exact == 10'000 && worst < 1.0,
          std::to_string(exact) + "/10000 profiles sum to L exactly; max |l_i - p_i L| = " + fmt(worst, 6));
}

}  // namespace

int main(int argc, char** argv) {
  const fs::path out = argc > 1 ? fs::path(argv[1]) : fs::path("acceptance_out");
  fs::remove_all(out);

  const auto t0 = std::chrono::steady_clock::now();
  SuiteOptions options;
  options.seeds = kSeeds;
  SuiteReport suite;
  try {
    suite = replicate_suite(out, options);
  } catch (const std::exception& e) {
    std::printf("replication suite failed to run: %s\n", e.what());
    return 1;
  }
  const double suite_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::printf("replication suite: %zu runs in %.1f s, output in %s\n", suite.runs.size(), suite_s,
              out.string().c_str());

  criterion1();
  criterion2(suite);
  criterion3(suite);
  criterion4(suite);
  criterion5();
  criterion6();
  criterion7(suite, out);
  criterion8();

  std::printf("%d of 8 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
