#pragma once

// Scenario runs with on-disk artifacts, and the bundled replication suite.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "nfscale/scenario_file.hpp"

namespace nfscale {

struct RunOptions {
  double band = 0.10;
  std::size_t dwell_s = 2;
  double split_window_s = 2.0;  // new-session split is measured over this span after an add
};

struct IntervalShares {
  Interval interval;
  std::map<ChainId, double> shares;
  std::uint64_t bytes = 0;
};

struct EventReport {
  double at = 0.0;
  ActionKind kind = ActionKind::Rebalance;
  std::optional<ChainId> chain;
  std::uint64_t generation = 0;
  bool ok = false;
  std::vector<ChainId> live_after;
  std::optional<double> convergence_s;  // live chains back within the band
  std::optional<double> drain_s;        // removed chain's bytes reach zero
  std::optional<double> idle_after_last_s;  // path idle instant minus last packet
  std::optional<double> reclaimed_at;
  std::uint32_t new_sessions = 0;     // sessions first mapped in the split window
  std::uint32_t new_on_chain = 0;     // of those, assigned to the added chain
  std::vector<std::string> notes;
};

struct RunReport {
  std::string scenario;
  std::uint64_t seed = 0;
  double horizon_s = 0.0;
  std::vector<IntervalShares> steady;
  std::vector<EventReport> events;
  RunCounters counters;
  bool conserved = false;
  bool buckets_always_equal = false;
  std::uint32_t sessions = 0;
  std::uint32_t single_chain_sessions = 0;
  std::uint32_t agreed_sessions = 0;
  std::uint32_t reversed_sessions = 0;
  std::filesystem::path csv_path;
  std::filesystem::path report_path;
  std::filesystem::path events_path;

  /// No anomalies and no invariant violations.
  bool clean() const noexcept;
  nlohmann::ordered_json to_json() const;
};

/// Runs the scenario and the measurements. Writes nothing.
RunReport evaluate(const ScenarioFile& file, const RunOptions& options, RunResult* keep = nullptr);

/// evaluate() plus <name>-s<seed>.csv, .report.json and .events.jsonl in out_dir.
RunReport run_scenario(const ScenarioFile& file, const std::filesystem::path& out_dir,
                       const RunOptions& options = {});

struct CorpusEntry {
  std::string name;
  std::string text;
};

/// Desk-scale scenarios shipped with the library.
const std::vector<CorpusEntry>& bundled_corpus();
ScenarioFile bundled_scenario(const std::string& name);

struct Check {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct SuiteOptions {
  RunOptions run;
  std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
  std::vector<std::string> only;  // scenario names; empty means all
  std::optional<double> horizon_s;
  bool parallel = true;
};

struct SuiteReport {
  std::vector<RunReport> runs;  // scenario-major, seeds in order
  std::vector<Check> checks;
  nlohmann::ordered_json summary;

  bool passed() const noexcept;
};

/// Runs every bundled scenario over the seeds, writes each run's artifacts and
/// summary.json to out_dir. Runs execute in parallel unless options.parallel is false.
SuiteReport replicate_suite(const std::filesystem::path& out_dir, const SuiteOptions& options = {});

}  // namespace nfscale
