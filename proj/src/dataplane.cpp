#include "nfscale/dataplane.hpp"

#include <algorithm>

#include "nfscale/error.hpp"

namespace nfscale {

Frame push_tag(Frame frame, std::uint16_t tag) {
  if (frame.depth == kMaxTagDepth) throw Error(Errc::InvalidArgument, "tag stack full");
  frame.tags[frame.depth++] = tag;
  return frame;
}

Frame pop_tag(Frame frame) {
  if (frame.depth == 0) throw Error(Errc::EmptyTagStack, "pop on an untagged frame");
  frame.tags[--frame.depth] = 0;
  return frame;
}

bool RouteRule::matches(std::uint16_t port, const Frame& frame) const noexcept {
  if (in_port && *in_port != port) return false;
  switch (match) {
    case Match::Untagged: return !frame.tagged();
    case Match::Tag: return frame.outer_tag() == tag;
    case Match::Any: return true;
  }
  return false;
}

Routed route(const TagRouter& router, std::uint16_t in_port, Frame frame) {
  for (const auto& rule : router.rules()) {
    if (!rule.matches(in_port, frame)) continue;
    switch (rule.action) {
      case TagAction::None: break;
      case TagAction::Push: frame = push_tag(frame, rule.push); break;
      case TagAction::Pop: frame = pop_tag(frame); break;
    }
    return Routed{rule.out_port, frame};
  }
  const auto tag = frame.outer_tag();
  throw Error(Errc::NoRoute, "port " + std::to_string(in_port) + ", tag " +
                                 (tag ? std::to_string(*tag) : std::string("none")));
}

TagRouter edge_switch_rules(const std::vector<ChainId>& chains, Edge edge) {
  using M = RouteRule::Match;
  TagRouter r;
  r.add({port::kHost, M::Untagged, 0, port::kToBalancer});
  r.add({std::uint16_t{2}, M::Untagged, 0, port::kToBalancer});
  for (std::size_t i = 0; i < chains.size(); ++i) {
    const auto outbound = edge == Edge::Client ? chains[i].forward_tag() : chains[i].reverse_tag();
    r.add({port::kFromBalancer, M::Tag, outbound, static_cast<std::uint16_t>(port::kFirstBranch + i)});
  }
  for (const auto& c : chains) {
    const auto inbound = edge == Edge::Client ? c.reverse_tag() : c.forward_tag();
    r.add({std::nullopt, M::Tag, inbound, port::kToBalancer});
  }
  r.add({port::kFromBalancer, M::Untagged, 0, port::kHost});
  return r;
}

TagRouter branch_switch_rules(const ChainId& chain) {
  using M = RouteRule::Match;
  TagRouter r;
  r.add({port::kClientSide, M::Tag, chain.forward_tag(), port::kNfIn, TagAction::Pop});
  r.add({port::kNfOut, M::Any, 0, port::kServerSide, TagAction::Push, chain.forward_tag()});
  r.add({port::kServerSide, M::Tag, chain.reverse_tag(), port::kNfOut, TagAction::Pop});
  r.add({port::kNfIn, M::Any, 0, port::kClientSide, TagAction::Push, chain.reverse_tag()});
  return r;
}

void NfConfig::validate() const {
  if (mode == NfMode::CapacityLimited && !(capacity_Bps > 0.0)) {
    throw Error(Errc::InvalidArgument, "nf: capacity must be positive in capacity-limited mode");
  }
  if (!(burst_bytes >= 0.0)) throw Error(Errc::InvalidArgument, "nf: burst must be non-negative");
  if (queue_limit == 0) throw Error(Errc::InvalidArgument, "nf: queue_limit must be positive");
}

NfInstance::NfInstance(ChainId id, NfConfig config) : id_(id), config_(config), tokens_(config.burst_bytes) {
  config_.validate();
}

std::size_t NfInstance::queued(double now) {
  while (!departures_.empty() && departures_.front() <= now) departures_.pop_front();
  return departures_.size();
}

double NfInstance::process(const Frame& frame, double now) {
  if (frame.tagged()) throw Error(Errc::InvalidArgument, "NF " + id_.to_string() + " received a tagged frame");
  if (config_.mode == NfMode::Passthrough) return now;
  if (queued(now) >= config_.queue_limit) {
    throw Error(Errc::QueueOverflow, "NF " + id_.to_string() + " queue at " + std::to_string(config_.queue_limit));
  }

  const double rate = config_.capacity_Bps;
  const double size = frame.bytes;
  const double depth = std::max(config_.burst_bytes, size);
  const double start = std::max(now, last_departure_);
  const double available = std::min(depth, tokens_ + rate * (start - last_));
  const double departure = available >= size ? start : start + (size - available) / rate;
  tokens_ = std::min(depth, available + rate * (departure - start)) - size;
  last_ = departure;
  last_departure_ = departure;
  departures_.push_back(departure);
  return departure;
}

}  // namespace nfscale
