#include "nfscale/traffic.hpp"

#include <algorithm>
#include <cmath>

#include "nfscale/error.hpp"

namespace nfscale {

namespace {

constexpr std::uint32_t kClientsPerAddress = 50'000;
constexpr std::uint16_t kFirstClientPort = 1024;

double unit(SplitMix64& rng) noexcept { return static_cast<double>(rng.next() >> 11) * 0x1.0p-53; }

std::uint32_t packets_for(std::uint64_t bytes, std::uint32_t size) noexcept {
  return static_cast<std::uint32_t>((bytes + size - 1) / size);
}

std::uint32_t size_of(std::uint64_t bytes, std::uint32_t size, std::uint32_t index, std::uint32_t count) noexcept {
  if (index + 1 < count) return size;
  return static_cast<std::uint32_t>(bytes - std::uint64_t{size} * (count - 1));
}

}  // namespace

void TrafficProfile::validate() const {
  auto fail = [](const std::string& what) { return Error(Errc::InvalidArgument, "traffic: " + what); };
  if (sessions == 0) throw fail("sessions must be positive");
  if (!(rate > 0.0)) throw fail("rate must be positive");
  if (!(start_s >= 0.0)) throw fail("start must be non-negative");
  if (bytes_per_session == 0) throw fail("bytes_per_session must be positive");
  if (!(request_share > 0.0 && request_share <= 1.0)) throw fail("request_share must be in (0, 1]");
  if (packet_size == 0) throw fail("packet_size must be positive");
  if (!(think_s > 0.0)) throw fail("think must be positive");
  if (!(duration_jitter >= 0.0 && duration_jitter < 1.0)) throw fail("duration_jitter must be in [0, 1)");
  if (!(median_duration_s * (1.0 - duration_jitter) > think_s)) throw fail("sessions must outlast the think time");
  if (!(reversed_fraction >= 0.0 && reversed_fraction <= 1.0)) throw fail("reversed_fraction must be in [0, 1]");
}

std::uint32_t SessionSpec::request_packets() const noexcept { return packets_for(request_bytes, packet_size); }
std::uint32_t SessionSpec::response_packets() const noexcept { return packets_for(response_bytes, packet_size); }

std::vector<SessionSpec> generate_sessions(const TrafficProfile& profile, std::uint64_t seed) {
  profile.validate();
  SplitMix64 rng(seed);
  const Endpoint server = Endpoint::parse("10.1.0.2:80");
  const auto request = std::max<std::uint64_t>(
      1, static_cast<std::uint64_t>(std::llround(static_cast<double>(profile.bytes_per_session) * profile.request_share)));

  // Ephemeral ports start at a seed-dependent offset, as separate runs of a real client would.
  const auto port_offset = static_cast<std::uint32_t>(rng.next() % kClientsPerAddress);
  const auto host_offset = static_cast<std::uint32_t>(rng.next() % 200);

  std::vector<SessionSpec> out;
  out.reserve(profile.sessions);
  double clock = profile.start_s;
  for (std::uint32_t i = 0; i < profile.sessions; ++i) {
    const double gap = unit(rng);
    const double jitter = unit(rng);
    const double flip = unit(rng);

    SessionSpec s;
    s.id = i;
    if (profile.arrivals == Arrivals::Fixed) {
      s.start = profile.start_s + i / profile.rate;
    } else {
      if (i > 0) clock += -std::log1p(-gap) / profile.rate;
      s.start = clock;
    }
    s.duration = profile.median_duration_s * (1.0 + profile.duration_jitter * (2.0 * jitter - 1.0));
    s.request_bytes = std::min(request, profile.bytes_per_session);
    s.response_bytes = profile.bytes_per_session - s.request_bytes;
    s.packet_size = profile.packet_size;
    s.think = profile.think_s;
    s.reversed = s.response_bytes > 0 && flip < profile.reversed_fraction;
    if (profile.tuple_pool > 0) {
      s.client = Endpoint::v4(0x0a000001u + host_offset,
                              static_cast<std::uint16_t>(kFirstClientPort + (port_offset + i) % profile.tuple_pool));
    } else {
      const std::uint32_t slot = port_offset + i;
      s.client = Endpoint::v4(0x0a000001u + host_offset + slot / kClientsPerAddress,
                              static_cast<std::uint16_t>(kFirstClientPort + slot % kClientsPerAddress));
    }
    s.server = server;
    out.push_back(s);
  }
  return out;
}

std::vector<TrafficPacket> packetize(const SessionSpec& s) {
  const auto nq = s.request_packets();
  const auto nr = s.response_packets();
  std::vector<TrafficPacket> out;
  out.reserve(nq + nr);

  auto emit = [&](Direction dir, std::uint32_t index, std::uint32_t bytes, double t) {
    TrafficPacket p;
    p.packet = dir == Direction::Forward ? LogicalPacket{s.client, s.server, bytes, t, {}}
                                         : LogicalPacket{s.server, s.client, bytes, t, {}};
    p.session = s.id;
    p.dir = dir;
    p.index = index;
    out.push_back(p);
  };

  for (std::uint32_t k = 0; k < nq; ++k) {
    const double offset = s.reversed ? s.think * (k + 1) / (nq + 1) : s.think * k / nq;
    emit(Direction::Forward, k, size_of(s.request_bytes, s.packet_size, k, nq), s.start + offset);
  }
  const double first = s.start + s.think;
  const double last = s.start + s.duration;
  for (std::uint32_t j = 0; j < nr; ++j) {
    double t = nr == 1 ? first : first + (last - first) * j / (nr - 1);
    if (s.reversed && j == 0) t = s.start;
    emit(Direction::Reverse, j, size_of(s.response_bytes, s.packet_size, j, nr), t);
  }
  return out;
}

std::vector<TrafficPacket> generate_traffic(const TrafficProfile& profile, std::uint64_t seed) {
  std::vector<TrafficPacket> out;
  for (const auto& s : generate_sessions(profile, seed)) {
    auto packets = packetize(s);
    out.insert(out.end(), packets.begin(), packets.end());
  }
  std::stable_sort(out.begin(), out.end(), [](const TrafficPacket& a, const TrafficPacket& b) {
    if (a.packet.timestamp != b.packet.timestamp) return a.packet.timestamp < b.packet.timestamp;
    if (a.session != b.session) return a.session < b.session;
    if (a.dir != b.dir) return a.dir < b.dir;
    return a.index < b.index;
  });
  return out;
}

}  // namespace nfscale
