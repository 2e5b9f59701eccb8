#pragma once

#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <unordered_map>
#include <vector>

#include "nfscale/hashcore.hpp"
#include "nfscale/rebalance.hpp"

namespace nfscale {

inline constexpr double kDefaultSessionTimeout = 6.0;

enum class Role : std::uint8_t { Master, Slave };

struct LogicalPacket {
  Endpoint src;
  Endpoint dst;
  std::uint32_t bytes = 0;
  double timestamp = 0.0;
  std::optional<std::uint16_t> tag;

  SessionKey key() const noexcept { return canonical_key(src, dst); }
};

struct SessionRecord {
  double last_seen = 0.0;
  ChainId assigned;
};

/// Affinity table. A record is active at `now` iff last_seen + timeout > now.
class SessionTable {
 public:
  explicit SessionTable(double timeout_s = kDefaultSessionTimeout);

  double timeout() const noexcept { return timeout_; }
  bool active(const SessionRecord& rec, double now) const noexcept {
    return rec.last_seen + timeout_ > now;
  }
  /// Active record for `key`, or nullptr.
  SessionRecord* find_active(const SessionKey& key, double now);
  const SessionRecord* find(const SessionKey& key) const;
  void upsert(const SessionKey& key, SessionRecord rec);
  bool any_active_on(const ChainId& id, double now) const;
  std::size_t expire(double now);
  std::size_t size() const noexcept { return entries_.size(); }

 private:
  std::unordered_map<SessionKey, SessionRecord> entries_;
  double timeout_;
};

/// A complete bucket-layout change. The master computes it and both balancers
/// apply the same plan, so their vectors stay bit-identical.
struct Plan {
  std::uint64_t generation = 0;
  WeightProfile profile;  // live chains only
  Allocation allocation;
  std::optional<ChainId> drain;
};

// Plan builders. An empty window (no bytes on live chains) is treated as
// equal traffic on every chain.
Plan plan_initial(const std::vector<ChainId>& chains, std::uint32_t buckets, std::uint64_t generation);
Plan plan_add(const WeightProfile& current, const TrafficWindow& window, const ChainId& added,
              std::uint32_t buckets, std::uint64_t generation);
Plan plan_remove(const WeightProfile& current, const TrafficWindow& window, const ChainId& victim,
                 std::uint32_t buckets, std::uint64_t generation);
Plan plan_rebalance(const WeightProfile& current, const TrafficWindow& window, std::uint32_t buckets,
                    std::uint64_t generation);

/// A plan with its vector already built; produced outside the critical region.
struct PreparedPlan {
  Plan plan;
  std::shared_ptr<const BucketVector> buckets;
};

struct Assignment {
  ChainId chain;
  std::uint64_t generation = 0;
  bool from_table = false;
};

enum class Observation : std::uint8_t {
  Learned,    // no active record; observed chain recorded
  Refreshed,  // record agreed with the observed chain
  Corrected,  // master overwrote a divergent record
  Diverged,   // slave saw a different chain and kept its own
};

/// One load balancer. Every public member locks the balancer's mutex except
/// prepare(), which only builds a vector.
class Balancer {
 public:
  Balancer(Role role, HashParams params, double session_timeout_s = kDefaultSessionTimeout);

  Balancer(const Balancer&) = delete;
  Balancer& operator=(const Balancer&) = delete;

  Role role() const noexcept { return role_; }
  const HashParams& params() const noexcept { return params_; }
  double session_timeout() const noexcept { return table_.timeout(); }

  /// Session-aware mapping of an untagged ingress packet. Counts p.bytes
  /// against the returned chain. Throws NoLiveChains before any plan.
  ChainId map_packet(const LogicalPacket& p);
  Assignment map_packet_traced(const LogicalPacket& p);

  /// A tagged packet coming back from a chain. The master corrects its table
  /// to the observed chain; the slave records it when it has no active
  /// record and otherwise keeps its own.
  Observation observe(const SessionKey& key, const ChainId& observed, double now);

  /// Master-only divergence correction. Throws WrongRole on a slave.
  void reconcile(const SessionKey& key, const ChainId& observed, double now);

  /// Removes `victim` from the vector and starts its cool-down. Throws
  /// UnknownChain if it is not live and LastChain if it is the only one.
  void begin_drain(const ChainId& victim, const TrafficWindow& window, std::uint64_t generation);

  /// True iff an active session is assigned to `id`.
  bool path_active(const ChainId& id, double now) const;

  /// Builds and swaps in a vector for `alloc`; the profile becomes l_i / L.
  void apply_allocation(const Allocation& alloc, std::uint64_t generation);

  PreparedPlan prepare(Plan plan) const;
  void commit(PreparedPlan prepared);

  /// Returns the counters accumulated since the previous snapshot and resets them.
  TrafficWindow snapshot_window(double now);
  std::size_t expire_sessions(double now);

  /// Forgets a drained chain once its resources are reclaimed.
  void release(const ChainId& id);

  std::shared_ptr<const BucketVector> buckets() const;
  WeightProfile profile() const;
  std::set<ChainId> draining() const;
  std::vector<ChainId> live_chains() const;
  std::uint64_t generation() const;
  std::optional<SessionRecord> record(const SessionKey& key) const;
  std::size_t table_size() const;

 private:
  Assignment map_locked(const LogicalPacket& p);

  const Role role_;
  const HashParams params_;

  mutable std::mutex mu_;
  std::shared_ptr<const BucketVector> buckets_;
  WeightProfile profile_;
  std::set<ChainId> draining_;
  SessionTable table_;
  TrafficWindow counters_;
  double window_start_ = 0.0;
};

}  // namespace nfscale
