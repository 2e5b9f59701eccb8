#pragma once

// Synthetic HTTP-like session workload.

#include <cstdint>
#include <vector>

#include "nfscale/balancer.hpp"

namespace nfscale {

enum class Arrivals : std::uint8_t { Fixed, Poisson };

struct TrafficProfile {
  std::uint32_t sessions = 800;
  double rate = 75.0;  // sessions per second
  Arrivals arrivals = Arrivals::Fixed;
  double start_s = 0.0;
  std::uint64_t bytes_per_session = 75'000;
  double request_share = 0.01;  // fraction of the bytes sent client -> server
  std::uint32_t packet_size = 1500;
  double median_duration_s = 6.0;
  double duration_jitter = 0.05;  // uniform, relative
  double think_s = 0.02;          // server delay before the first response packet
  double reversed_fraction = 0.0;  // sessions whose first packet comes from the server
  std::uint32_t tuple_pool = 0;    // >0 reuses client ports modulo this value

  void validate() const;
};

struct SessionSpec {
  std::uint32_t id = 0;
  Endpoint client;
  Endpoint server;
  double start = 0.0;
  double duration = 0.0;
  std::uint64_t request_bytes = 0;
  std::uint64_t response_bytes = 0;
  std::uint32_t packet_size = 0;
  double think = 0.0;
  bool reversed = false;

  std::uint64_t total_bytes() const noexcept { return request_bytes + response_bytes; }
  std::uint32_t request_packets() const noexcept;
  std::uint32_t response_packets() const noexcept;
};

enum class Direction : std::uint8_t { Forward, Reverse };  // client->server, server->client

struct TrafficPacket {
  LogicalPacket packet;  // timestamp is the nominal send time
  std::uint32_t session = 0;
  Direction dir = Direction::Forward;
  std::uint32_t index = 0;  // position within its direction
};

std::vector<SessionSpec> generate_sessions(const TrafficProfile& profile, std::uint64_t seed);

/// Packets of one session. Requests are spread over the think time after the
/// start; responses follow evenly until start + duration. Reversed sessions
/// send their first response at the start and their requests just after.
std::vector<TrafficPacket> packetize(const SessionSpec& session);

/// All packets of all sessions, ordered by (timestamp, session, direction, index).
std::vector<TrafficPacket> generate_traffic(const TrafficProfile& profile, std::uint64_t seed);

}  // namespace nfscale
