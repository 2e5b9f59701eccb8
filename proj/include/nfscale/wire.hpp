#pragma once

// Control-plane message schema and its length-prefixed binary encoding.
// Layout is documented in docs/control-protocol.md.

#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "nfscale/balancer.hpp"
#include "nfscale/error.hpp"

namespace nfscale {

using Bytes = std::vector<std::uint8_t>;

enum class MessageKind : std::uint8_t {
  Handshake = 1,
  AddChain = 2,
  RemoveChain = 3,
  StatsRequest = 4,
  StatsReply = 5,
  PathActiveRequest = 6,
  PathActiveReply = 7,
  Rebalance = 8,
  AllocationCommit = 9,
  Ack = 10,
};

std::string_view kind_name(MessageKind kind) noexcept;
/// Reply kind expected for a request kind; Ack for everything but the two queries.
MessageKind reply_kind(MessageKind request) noexcept;

struct ClusterConfig {
  HashParams hash;
  double session_timeout_s = kDefaultSessionTimeout;
  double window_s = kDefaultWindowSeconds;
  std::vector<ChainId> chains;

  bool operator==(const ClusterConfig&) const = default;
};

/// FNV-1a over the encoded config; slaves echo it so the master can verify.
std::uint64_t config_digest(const ClusterConfig& cfg);

enum class CommitPhase : std::uint8_t { Prepare = 1, Commit = 2, Abort = 3 };

struct HandshakeBody {
  ClusterConfig config;
};
struct ChainBody {
  ChainId chain;
};
struct EmptyBody {};
struct StatsBody {
  TrafficWindow window;
};
struct PathActiveBody {
  bool active = false;
};
struct CommitBody {
  CommitPhase phase = CommitPhase::Prepare;
  Plan plan;
};
struct AckBody {
  bool ok = true;
  Errc error = Errc::InvalidArgument;
  std::uint64_t generation = 0;
  std::uint64_t digest = 0;
  std::string detail;
};

using MessageBody =
    std::variant<HandshakeBody, ChainBody, EmptyBody, StatsBody, PathActiveBody, CommitBody, AckBody>;

struct ControlMessage {
  MessageKind kind = MessageKind::Ack;
  std::uint64_t seq = 0;
  double time = 0.0;
  MessageBody body = EmptyBody{};
};

ControlMessage make_handshake(std::uint64_t seq, double time, ClusterConfig cfg);
ControlMessage make_chain(MessageKind kind, std::uint64_t seq, double time, const ChainId& chain);
ControlMessage make_empty(MessageKind kind, std::uint64_t seq, double time);
ControlMessage make_stats_reply(std::uint64_t seq, double time, TrafficWindow window);
ControlMessage make_path_active_reply(std::uint64_t seq, double time, bool active);
ControlMessage make_commit(std::uint64_t seq, double time, CommitPhase phase, Plan plan);
ControlMessage make_ack(std::uint64_t seq, double time, std::uint64_t generation = 0, std::uint64_t digest = 0);
ControlMessage make_nack(std::uint64_t seq, double time, const Error& error);

/// [u32 length of the rest][u8 kind][u64 seq][f64 time][body], little endian.
Bytes encode(const ControlMessage& msg);
/// Throws Error(Decode) on truncated, oversized or malformed input.
ControlMessage decode(std::span<const std::uint8_t> bytes);

}  // namespace nfscale
