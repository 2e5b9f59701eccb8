#include <chrono>
#include <cstdio>
#include <iostream>

#include <CLI11.hpp>

#include "nfscale/error.hpp"
#include "nfscale/report.hpp"

namespace {

using namespace nfscale;

void print_run(const RunReport& r) {
  std::printf("%s seed %llu: %s\n", r.scenario.c_str(), static_cast<unsigned long long>(r.seed),
              r.clean() ? "clean" : "VIOLATIONS");
  for (const auto& s : r.steady) {
    std::printf("  shares [%g, %g):", s.interval.from, s.interval.to > 0.0 ? s.interval.to : r.horizon_s);
    for (const auto& [c, v] : s.shares) std::printf(" %s=%.4f", c.to_string().c_str(), v);
    std::printf("\n");
  }
  for (const auto& e : r.events) {
    std::printf("  t=%g %s", e.at, std::string(action_name(e.kind)).c_str());
    if (e.chain) std::printf(" %s", e.chain->to_string().c_str());
    if (e.convergence_s) std::printf("  convergence %.0f s", *e.convergence_s);
    if (e.drain_s) std::printf("  drain %.0f s", *e.drain_s);
    if (e.idle_after_last_s) std::printf("  idle %.2f s after last packet", *e.idle_after_last_s);
    if (e.kind == ActionKind::Add && e.new_sessions) {
      std::printf("  new sessions on it %u/%u", e.new_on_chain, e.new_sessions);
    }
    for (const auto& n : e.notes) std::printf("\n    %s", n.c_str());
    std::printf("\n");
  }
  std::printf("  bytes injected %llu delivered %llu dropped %llu in flight %llu%s, anomalies %llu\n",
              static_cast<unsigned long long>(r.counters.injected_bytes),
              static_cast<unsigned long long>(r.counters.delivered_bytes),
              static_cast<unsigned long long>(r.counters.dropped_bytes),
              static_cast<unsigned long long>(r.counters.in_flight_bytes), r.conserved ? "" : " (NOT CONSERVED)",
              static_cast<unsigned long long>(r.counters.anomalies));
  if (r.single_chain_sessions != r.sessions || r.agreed_sessions != r.sessions) {
    std::printf("  sessions %u: single-chain %u, agreed %u\n", r.sessions, r.single_chain_sessions, r.agreed_sessions);
  }
  if (!r.buckets_always_equal) std::printf("  master and slave bucket vectors differed after a commit\n");
  std::printf("  wrote %s\n", r.csv_path.string().c_str());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Session-affine load balancing for NF chains: scenario runner"};
  app.require_subcommand(1);
  app.fallthrough();

  double band = 0.10;
  std::optional<double> horizon;
  app.add_option("--band", band, "convergence band, relative to the fair share")->check(CLI::Range(0.0, 1.0));
  app.add_option("--horizon", horizon, "override the run horizon (s)")->check(CLI::PositiveNumber);

  auto* run_cmd = app.add_subcommand("run", "run one scenario file");
  std::string file;
  std::optional<std::uint64_t> seed;
  std::string out = "out";
  run_cmd->add_option("file", file, "scenario file (YAML)")->required();
  run_cmd->add_option("--seed", seed, "override the scenario seed");
  run_cmd->add_option("--out", out, "output directory");

  auto* rep_cmd = app.add_subcommand("replicate", "run the bundled scenario corpus over five seeds");
  std::string rep_out = "replicate";
  std::vector<std::string> only;
  bool serial = false;
  rep_cmd->add_option("--out", rep_out, "output directory");
  rep_cmd->add_option("--only", only, "restrict to these scenario names");
  rep_cmd->add_flag("--serial", serial, "run scenarios one after another");

  auto* list_cmd = app.add_subcommand("list", "list the bundled scenarios");
  auto* show_cmd = app.add_subcommand("show", "print a bundled scenario");
  std::string show_name;
  show_cmd->add_option("name", show_name)->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*list_cmd) {
      for (const auto& e : bundled_corpus()) std::cout << e.name << "\n";
      return 0;
    }
    if (*show_cmd) {
      for (const auto& e : bundled_corpus()) {
        if (e.name == show_name) {
          std::cout << e.text;
          return 0;
        }
      }
      std::cerr << "no bundled scenario named " << show_name << "\n";
      return 2;
    }
    RunOptions ro;
    ro.band = band;
    if (*run_cmd) {
      auto sf = parse_scenario(file);
      if (seed) sf.scenario.seed = *seed;
      if (horizon) sf.scenario.horizon_s = *horizon;
      const auto r = run_scenario(sf, out, ro);
      print_run(r);
      return r.clean() ? 0 : 1;
    }
    SuiteOptions so;
    so.run = ro;
    so.horizon_s = horizon;
    so.only = only;
    so.parallel = !serial;
    const auto t0 = std::chrono::steady_clock::now();
    const auto suite = replicate_suite(rep_out, so);
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    for (const auto& c : suite.checks) {
      std::printf("%s  %s  [%s]\n", c.pass ? "PASS" : "FAIL", c.name.c_str(), c.detail.c_str());
    }
    std::printf("%zu runs in %.1f s; summary in %s/summary.json\n", suite.runs.size(), wall, rep_out.c_str());
    const bool clean = std::all_of(suite.runs.begin(), suite.runs.end(), [](const RunReport& r) { return r.clean(); });
    return clean ? 0 : 1;
  } catch (const Error& e) {
    std::cerr << e.what() << "\n";
    return 2;
  }
}
