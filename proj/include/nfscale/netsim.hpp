#pragma once

// Discrete-event model of the two-switch testbed: client and server hosts,
// edge switches, the master/slave balancer pair, one branch switch and NF per
// chain, and the management system acting on a timed script.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "nfscale/dataplane.hpp"
#include "nfscale/series.hpp"
#include "nfscale/wire.hpp"

namespace nfscale {

enum class ActionKind : std::uint8_t { Add, Remove, Rebalance };

struct Action {
  double at = 0.0;
  ActionKind kind = ActionKind::Rebalance;
  std::optional<ChainId> chain;
};

struct Scenario {
  std::string name = "scenario";
  std::uint64_t seed = 1;
  ClusterConfig cluster;         // initial chains live in cluster.chains
  std::vector<ChainId> standby;  // declared for later AddChain actions
  TrafficProfile traffic;
  std::vector<Action> actions;
  NfConfig nf;
  double hop_latency_s = 0.001;
  double stats_interval_s = 0.0;  // 0: the window length
  double poll_interval_s = 0.5;
  double expire_interval_s = 1.0;
  double horizon_s = 0.0;  // 0: derived from the traffic

  /// Initial then standby chains; fixes branch and CSV order.
  std::vector<ChainId> declared() const;
  double effective_horizon() const;
  /// Throws ScenarioInvalid naming the offending field.
  void validate() const;
};

struct LogRecord {
  double time = 0.0;
  std::string kind;
  nlohmann::ordered_json data;
};

struct SessionOutcome {
  std::uint32_t id = 0;
  double start = 0.0;
  bool reversed = false;
  std::optional<ChainId> first_chain;  // chain of its first NF traversal
  std::optional<ChainId> master_choice;  // master's assignment when it first mapped the session
  double first_mapped = 0.0;
  bool single_chain = true;  // every NF traversal used the same chain
  bool agreed = true;        // master and slave records matched at the last delivery
  std::uint32_t delivered_packets = 0;
};

struct DrainOutcome {
  ChainId chain;
  double removed_at = 0.0;
  double last_packet = -1.0;  // last packet either balancer handled on it; -1 if none
  double inactive_at = -1.0;  // instant both balancers report it idle
  double reclaimed_at = -1.0;  // MS poll that found it idle
};

struct CommitOutcome {
  double at = 0.0;
  ActionKind kind = ActionKind::Rebalance;
  std::optional<ChainId> chain;
  std::uint64_t generation = 0;
  bool ok = false;
  std::size_t live_before = 0;
  std::vector<ChainId> live_after;
};

struct RunCounters {
  std::uint64_t injected_bytes = 0;
  std::uint64_t delivered_bytes = 0;
  std::uint64_t dropped_bytes = 0;
  std::uint64_t in_flight_bytes = 0;
  std::uint64_t packets = 0;
  std::uint64_t no_route = 0;
  std::uint64_t overflow = 0;
  std::uint64_t corrected = 0;  // master tables fixed from returning packets
  std::uint64_t diverged = 0;   // slave kept its own record against a tag
  std::uint64_t anomalies = 0;  // routing anomalies and invariant violations
};

struct RunResult {
  ThroughputSeries series;
  std::vector<LogRecord> log;
  std::vector<SessionOutcome> sessions;
  std::vector<CommitOutcome> commits;
  std::vector<DrainOutcome> drains;
  RunCounters counters;
  bool buckets_always_equal = true;  // master and slave vectors after every commit
};

/// Runs the scenario to its horizon. Throws ScenarioInvalid.
RunResult run(const Scenario& scenario);

std::string_view action_name(ActionKind kind) noexcept;

}  // namespace nfscale
