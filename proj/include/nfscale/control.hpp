#pragma once

// Management system and the master/slave coordination protocol.
//
// The MS talks to the master and (for path polling) to the slave over
// request/reply channels; the master talks to the slave synchronously.
// Bucket-layout changes go through a two-phase barrier: the master sends
// Prepare with the full plan, the slave builds the vector and acks, then
// Commit swaps both. A missing ack aborts and the master keeps the previous
// generation.

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "nfscale/balancer.hpp"
#include "nfscale/wire.hpp"

namespace nfscale {

struct TraceEntry {
  double time = 0.0;
  std::string link;
  bool reply = false;
  MessageKind kind = MessageKind::Ack;
  std::uint64_t seq = 0;
  std::size_t size = 0;
  std::uint64_t digest = 0;  // FNV-1a of the encoded bytes
};

/// Shared, append-only message log; the basis for protocol-determinism checks.
class MessageTrace {
 public:
  void record(TraceEntry entry) { entries_.push_back(std::move(entry)); }
  const std::vector<TraceEntry>& entries() const noexcept { return entries_; }

 private:
  std::vector<TraceEntry> entries_;
};

/// Reliable, in-order, synchronous request/reply channel. Every message is
/// encoded and decoded on the way through so the wire format is exercised.
class Channel {
 public:
  using Handler = std::function<ControlMessage(const ControlMessage&)>;

  Channel(std::string name, MessageTrace* trace = nullptr);

  void connect(Handler handler) { handler_ = std::move(handler); }
  void set_up(bool up) noexcept { up_ = up; }
  bool up() const noexcept { return up_ && static_cast<bool>(handler_); }
  /// Deliver requests but lose every reply whose request kind/phase matches.
  void drop_replies_if(std::function<bool(const ControlMessage&)> predicate) { drop_ = std::move(predicate); }

  /// nullopt when the peer is down or the reply was lost.
  std::optional<ControlMessage> call(const ControlMessage& request);

 private:
  void log(const ControlMessage& msg, const Bytes& wire, bool reply);

  std::string name_;
  MessageTrace* trace_;
  Handler handler_;
  std::function<bool(const ControlMessage&)> drop_;
  bool up_ = true;
};

/// Slave side: owns its balancer once the handshake arrives.
class SlaveNode {
 public:
  /// `pinned` rejects handshakes carrying a different config.
  explicit SlaveNode(std::optional<ClusterConfig> pinned = std::nullopt);

  ControlMessage handle(const ControlMessage& msg);

  bool ready() const noexcept { return balancer_ != nullptr; }
  Balancer& balancer();
  const ClusterConfig& config() const;
  const std::vector<std::uint64_t>& committed_generations() const noexcept { return committed_; }

 private:
  ControlMessage on_commit(const ControlMessage& msg, const CommitBody& body);

  std::optional<ClusterConfig> pinned_;
  std::optional<ClusterConfig> config_;
  std::unique_ptr<Balancer> balancer_;
  std::optional<PreparedPlan> staged_;
  std::optional<Plan> current_;
  std::optional<Plan> previous_;
  std::vector<std::uint64_t> committed_;
};

/// Master side: validates MS requests, computes plans and drives the barrier.
class MasterNode {
 public:
  explicit MasterNode(Channel& to_slave);

  ControlMessage handle(const ControlMessage& msg);

  /// Builds the master balancer and configures the slave. Throws
  /// SlaveUnreachable (retriable) or ConfigMismatch.
  void handshake(const ClusterConfig& cfg, double now);

  bool ready() const noexcept { return balancer_ != nullptr; }
  Balancer& balancer();
  const ClusterConfig& config() const;
  const std::vector<std::uint64_t>& committed_generations() const noexcept { return committed_; }
  /// Merged window from the most recent stats poll.
  const TrafficWindow& last_window() const noexcept { return last_window_; }

  void add_chain(const ChainId& chain, double now);
  void remove_chain(const ChainId& chain, double now);
  void rebalance(double now);
  TrafficWindow poll_stats(double now);

 private:
  void require_ready() const;
  void two_phase(Plan plan, double now);
  ControlMessage call_slave(const ControlMessage& msg);

  Channel& to_slave_;
  std::optional<ClusterConfig> config_;
  std::unique_ptr<Balancer> balancer_;
  TrafficWindow last_window_;
  std::uint64_t next_generation_ = 1;
  std::uint64_t seq_ = 0;
  std::vector<std::uint64_t> committed_;
};

/// Scripted management system. Each call maps to one MS request.
class ManagementSystem {
 public:
  ManagementSystem(Channel& to_master, Channel& to_slave);

  /// Handshakes the pair. The slave must already be reachable.
  void start(const ClusterConfig& cfg, double now);

  void add_chain(const ChainId& chain, double now);
  void remove_chain(const ChainId& chain, double now);
  /// OR of the master's and the slave's answer. A drained chain that both
  /// report idle is marked reclaimable.
  bool poll_path_active(const ChainId& chain, double now);
  TrafficWindow poll_stats(double now);
  void request_rebalance(double now);

  const std::set<ChainId>& known_chains() const noexcept { return known_; }
  const std::set<ChainId>& reclaimable() const noexcept { return reclaimable_; }
  bool is_draining(const ChainId& chain) const { return removed_.contains(chain) && !reclaimable_.contains(chain); }

 private:
  ControlMessage request(Channel& channel, const ControlMessage& msg);

  Channel& to_master_;
  Channel& to_slave_;
  std::uint64_t seq_ = 0;
  std::set<ChainId> known_;
  std::set<ChainId> removed_;
  std::set<ChainId> reclaimable_;
};

/// Master, slave, MS and their channels wired together.
class Cluster {
 public:
  explicit Cluster(std::optional<ClusterConfig> slave_pinned = std::nullopt);

  Cluster(const Cluster&) = delete;
  Cluster& operator=(const Cluster&) = delete;

  MessageTrace trace;
  Channel ms_to_master;
  Channel ms_to_slave;
  Channel master_to_slave;
  SlaveNode slave;
  MasterNode master;
  ManagementSystem ms;
};

}  // namespace nfscale
