#pragma once

// Frames, VLAN-style tag stacks, switch rule tables and NF instances.

#include <array>
#include <cstdint>
#include <deque>
#include <optional>
#include <string>
#include <vector>

#include "nfscale/traffic.hpp"

namespace nfscale {

inline constexpr std::size_t kMaxTagDepth = 4;

struct Frame {
  Endpoint src;
  Endpoint dst;
  std::uint32_t bytes = 0;
  std::uint32_t session = 0;
  Direction dir = Direction::Forward;
  std::array<std::uint16_t, kMaxTagDepth> tags{};  // tags[depth - 1] is outermost
  std::uint8_t depth = 0;

  bool tagged() const noexcept { return depth > 0; }
  std::optional<std::uint16_t> outer_tag() const noexcept {
    if (depth == 0) return std::nullopt;
    return tags[depth - 1];
  }
  SessionKey key() const noexcept { return canonical_key(src, dst); }
};

/// Prepends `tag`. Throws InvalidArgument when the stack is full.
Frame push_tag(Frame frame, std::uint16_t tag);
/// Removes the outermost tag. Throws EmptyTagStack on an untagged frame.
Frame pop_tag(Frame frame);

enum class TagAction : std::uint8_t { None, Push, Pop };

struct RouteRule {
  std::optional<std::uint16_t> in_port;  // nullopt matches any port
  enum class Match : std::uint8_t { Untagged, Tag, Any } match = Match::Untagged;
  std::uint16_t tag = 0;                 // for Match::Tag
  std::uint16_t out_port = 0;
  TagAction action = TagAction::None;
  std::uint16_t push = 0;                // for TagAction::Push

  bool matches(std::uint16_t port, const Frame& frame) const noexcept;
};

/// Ordered rule table; the first matching rule wins.
class TagRouter {
 public:
  void add(RouteRule rule) { rules_.push_back(rule); }
  const std::vector<RouteRule>& rules() const noexcept { return rules_; }

 private:
  std::vector<RouteRule> rules_;
};

struct Routed {
  std::uint16_t port = 0;
  Frame frame;
};

/// Applies the first matching rule. Throws NoRoute when none matches.
Routed route(const TagRouter& router, std::uint16_t in_port, Frame frame);

// Port layout of the edge switches: the host sits on port 1, the balancer
// receives on port 3 and sends back on port 4, chain branch i on port 5 + i.
namespace port {
inline constexpr std::uint16_t kHost = 1;
inline constexpr std::uint16_t kToBalancer = 3;
inline constexpr std::uint16_t kFromBalancer = 4;
inline constexpr std::uint16_t kFirstBranch = 5;
// Branch switches: 1 toward the client edge, 4 toward the server edge. Forward
// traffic enters the NF from port 2 and leaves it into port 3.
inline constexpr std::uint16_t kClientSide = 1;
inline constexpr std::uint16_t kNfIn = 2;
inline constexpr std::uint16_t kNfOut = 3;
inline constexpr std::uint16_t kServerSide = 4;
}  // namespace port

enum class Edge : std::uint8_t { Client, Server };

/// Rules for the client-side (master) or server-side (slave) edge switch.
/// `chains` fixes the branch order.
TagRouter edge_switch_rules(const std::vector<ChainId>& chains, Edge edge);
/// Rules for the switch in front of one chain's NF.
TagRouter branch_switch_rules(const ChainId& chain);

enum class NfMode : std::uint8_t { Passthrough, CapacityLimited };

struct NfConfig {
  NfMode mode = NfMode::Passthrough;
  double capacity_Bps = 0.0;
  double burst_bytes = 0.0;  // bucket depth; raised to the largest packet seen
  std::size_t queue_limit = 10'000;

  void validate() const;
};

/// A chain's NF. Capacity-limited instances shape output with a token bucket
/// and a FIFO, so the forwarded rate never exceeds capacity.
class NfInstance {
 public:
  NfInstance(ChainId id, NfConfig config);

  const ChainId& id() const noexcept { return id_; }
  /// Departure time of `frame` arriving at `now`. Throws InvalidArgument on a
  /// tagged frame and QueueOverflow when the FIFO is full.
  double process(const Frame& frame, double now);
  std::size_t queued(double now);

 private:
  ChainId id_;
  NfConfig config_;
  double tokens_ = 0.0;
  double last_ = 0.0;
  double last_departure_ = 0.0;
  std::deque<double> departures_;
};

}  // namespace nfscale
