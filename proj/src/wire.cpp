#include "nfscale/wire.hpp"

#include <bit>
#include <cstring>

namespace nfscale {

namespace {

constexpr std::uint32_t kMaxMessage = 16u << 20;
constexpr std::size_t kHeader = 4 + 1 + 8 + 8;

class Writer {
 public:
  void u8(std::uint8_t v) { out_.push_back(v); }
  void u16(std::uint16_t v) { put(v, 2); }
  void u32(std::uint32_t v) { put(v, 4); }
  void u64(std::uint64_t v) { put(v, 8); }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void chain(const ChainId& c) {
    u16(c.forward_tag());
    u16(c.reverse_tag());
  }
  void str(const std::string& s) {
    u32(static_cast<std::uint32_t>(s.size()));
    out_.insert(out_.end(), s.begin(), s.end());
  }
  Bytes take() { return std::move(out_); }

 private:
  void put(std::uint64_t v, int n) {
    for (int i = 0; i < n; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  Bytes out_;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> in) : in_(in) {}

  std::uint8_t u8() { return static_cast<std::uint8_t>(get(1)); }
  std::uint16_t u16() { return static_cast<std::uint16_t>(get(2)); }
  std::uint32_t u32() { return static_cast<std::uint32_t>(get(4)); }
  std::uint64_t u64() { return get(8); }
  double f64() { return std::bit_cast<double>(u64()); }
  ChainId chain() {
    const auto fwd = u16();
    const auto rev = u16();
    try {
      return ChainId(fwd, rev);
    } catch (const Error& e) {
      throw Error(Errc::Decode, e.what());
    }
  }
  std::string str() {
    const auto n = count(1);
    std::string s(reinterpret_cast<const char*>(in_.data() + pos_), n);
    pos_ += n;
    return s;
  }
  /// Element count, checked against the bytes that remain.
  std::uint32_t count(std::size_t min_element_size) {
    const auto n = u32();
    if (static_cast<std::uint64_t>(n) * min_element_size > in_.size() - pos_) {
      throw Error(Errc::Decode, "element count exceeds message");
    }
    return n;
  }
  bool done() const noexcept { return pos_ == in_.size(); }

 private:
  std::uint64_t get(int n) {
    if (in_.size() - pos_ < static_cast<std::size_t>(n)) throw Error(Errc::Decode, "truncated message");
    std::uint64_t v = 0;
    for (int i = 0; i < n; ++i) v |= std::uint64_t{in_[pos_ + i]} << (8 * i);
    pos_ += n;
    return v;
  }
  std::span<const std::uint8_t> in_;
  std::size_t pos_ = 0;
};

void write_config(Writer& w, const ClusterConfig& cfg) {
  w.u64(cfg.hash.seed);
  w.u32(cfg.hash.buckets);
  w.u32(cfg.hash.max_chains);
  w.f64(cfg.session_timeout_s);
  w.f64(cfg.window_s);
  w.u32(static_cast<std::uint32_t>(cfg.chains.size()));
  for (const auto& c : cfg.chains) w.chain(c);
}

ClusterConfig read_config(Reader& r) {
  ClusterConfig cfg;
  cfg.hash.seed = r.u64();
  cfg.hash.buckets = r.u32();
  cfg.hash.max_chains = r.u32();
  cfg.session_timeout_s = r.f64();
  cfg.window_s = r.f64();
  const auto n = r.count(4);
  for (std::uint32_t i = 0; i < n; ++i) cfg.chains.push_back(r.chain());
  return cfg;
}

void write_plan(Writer& w, const Plan& plan) {
  w.u64(plan.generation);
  w.u32(static_cast<std::uint32_t>(plan.profile.probs.size()));
  for (const auto& [id, p] : plan.profile.probs) {
    w.chain(id);
    w.f64(p);
  }
  w.u32(static_cast<std::uint32_t>(plan.allocation.size()));
  for (const auto& [id, count] : plan.allocation) {
    w.chain(id);
    w.u32(count);
  }
  w.u8(plan.drain.has_value());
  if (plan.drain) w.chain(*plan.drain);
}

Plan read_plan(Reader& r) {
  Plan plan;
  plan.generation = r.u64();
  auto n = r.count(12);
  for (std::uint32_t i = 0; i < n; ++i) {
    const auto id = r.chain();
    plan.profile.probs[id] = r.f64();
  }
  n = r.count(8);
  for (std::uint32_t i = 0; i < n; ++i) {
    const auto id = r.chain();
    plan.allocation.emplace_back(id, r.u32());
  }
  if (r.u8()) plan.drain = r.chain();
  return plan;
}

bool body_matches(MessageKind kind, const MessageBody& body) {
  switch (kind) {
    case MessageKind::Handshake: return std::holds_alternative<HandshakeBody>(body);
    case MessageKind::AddChain:
    case MessageKind::RemoveChain:
    case MessageKind::PathActiveRequest: return std::holds_alternative<ChainBody>(body);
    case MessageKind::StatsRequest:
    case MessageKind::Rebalance: return std::holds_alternative<EmptyBody>(body);
    case MessageKind::StatsReply: return std::holds_alternative<StatsBody>(body);
    case MessageKind::PathActiveReply: return std::holds_alternative<PathActiveBody>(body);
    case MessageKind::AllocationCommit: return std::holds_alternative<CommitBody>(body);
    case MessageKind::Ack: return std::holds_alternative<AckBody>(body);
  }
  return false;
}

}  // namespace

std::string_view kind_name(MessageKind kind) noexcept {
  switch (kind) {
    case MessageKind::Handshake: return "Handshake";
    case MessageKind::AddChain: return "AddChain";
    case MessageKind::RemoveChain: return "RemoveChain";
    case MessageKind::StatsRequest: return "StatsRequest";
    case MessageKind::StatsReply: return "StatsReply";
    case MessageKind::PathActiveRequest: return "PathActiveRequest";
    case MessageKind::PathActiveReply: return "PathActiveReply";
    case MessageKind::Rebalance: return "Rebalance";
    case MessageKind::AllocationCommit: return "AllocationCommit";
    case MessageKind::Ack: return "Ack";
  }
  return "Unknown";
}

MessageKind reply_kind(MessageKind request) noexcept {
  switch (request) {
    case MessageKind::StatsRequest: return MessageKind::StatsReply;
    case MessageKind::PathActiveRequest: return MessageKind::PathActiveReply;
    default: return MessageKind::Ack;
  }
}

std::uint64_t config_digest(const ClusterConfig& cfg) {
  Writer w;
  write_config(w, cfg);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (auto b : w.take()) {
    h ^= b;
    h *= 0x100000001b3ULL;
  }
  return h;
}

ControlMessage make_handshake(std::uint64_t seq, double time, ClusterConfig cfg) {
  return {MessageKind::Handshake, seq, time, HandshakeBody{std::move(cfg)}};
}

ControlMessage make_chain(MessageKind kind, std::uint64_t seq, double time, const ChainId& chain) {
  return {kind, seq, time, ChainBody{chain}};
}

ControlMessage make_empty(MessageKind kind, std::uint64_t seq, double time) {
  return {kind, seq, time, EmptyBody{}};
}

ControlMessage make_stats_reply(std::uint64_t seq, double time, TrafficWindow window) {
  return {MessageKind::StatsReply, seq, time, StatsBody{std::move(window)}};
}

ControlMessage make_path_active_reply(std::uint64_t seq, double time, bool active) {
  return {MessageKind::PathActiveReply, seq, time, PathActiveBody{active}};
}

ControlMessage make_commit(std::uint64_t seq, double time, CommitPhase phase, Plan plan) {
  return {MessageKind::AllocationCommit, seq, time, CommitBody{phase, std::move(plan)}};
}

ControlMessage make_ack(std::uint64_t seq, double time, std::uint64_t generation, std::uint64_t digest) {
  return {MessageKind::Ack, seq, time, AckBody{true, Errc::InvalidArgument, generation, digest, {}}};
}

ControlMessage make_nack(std::uint64_t seq, double time, const Error& error) {
  return {MessageKind::Ack, seq, time, AckBody{false, error.code(), 0, 0, error.what()}};
}

Bytes encode(const ControlMessage& msg) {
  if (!body_matches(msg.kind, msg.body)) {
    throw Error(Errc::InvalidArgument, std::string("body does not match kind ") + std::string(kind_name(msg.kind)));
  }
  Writer w;
  w.u32(0);
  w.u8(static_cast<std::uint8_t>(msg.kind));
  w.u64(msg.seq);
  w.f64(msg.time);
  std::visit(
      [&](const auto& body) {
        using T = std::decay_t<decltype(body)>;
        if constexpr (std::is_same_v<T, HandshakeBody>) {
          write_config(w, body.config);
        } else if constexpr (std::is_same_v<T, ChainBody>) {
          w.chain(body.chain);
        } else if constexpr (std::is_same_v<T, StatsBody>) {
          w.f64(body.window.length_s);
          w.u32(static_cast<std::uint32_t>(body.window.bytes.size()));
          for (const auto& [id, b] : body.window.bytes) {
            w.chain(id);
            w.u64(b);
          }
        } else if constexpr (std::is_same_v<T, PathActiveBody>) {
          w.u8(body.active);
        } else if constexpr (std::is_same_v<T, CommitBody>) {
          w.u8(static_cast<std::uint8_t>(body.phase));
          write_plan(w, body.plan);
        } else if constexpr (std::is_same_v<T, AckBody>) {
          w.u8(body.ok);
          w.u8(static_cast<std::uint8_t>(body.error));
          w.u64(body.generation);
          w.u64(body.digest);
          w.str(body.detail);
        }
      },
      msg.body);
  Bytes out = w.take();
  const auto len = static_cast<std::uint32_t>(out.size() - 4);
  for (int i = 0; i < 4; ++i) out[i] = static_cast<std::uint8_t>(len >> (8 * i));
  return out;
}

ControlMessage decode(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kHeader) throw Error(Errc::Decode, "message shorter than header");
  Reader prefix(bytes.first(4));
  const auto len = prefix.u32();
  if (len > kMaxMessage) throw Error(Errc::Decode, "message too large");
  if (len != bytes.size() - 4) throw Error(Errc::Decode, "length prefix does not match message size");

  Reader r(bytes.subspan(4));
  ControlMessage msg;
  const auto kind = r.u8();
  if (kind < 1 || kind > 10) throw Error(Errc::Decode, "unknown message kind " + std::to_string(kind));
  msg.kind = static_cast<MessageKind>(kind);
  msg.seq = r.u64();
  msg.time = r.f64();
  switch (msg.kind) {
    case MessageKind::Handshake: msg.body = HandshakeBody{read_config(r)}; break;
    case MessageKind::AddChain:
    case MessageKind::RemoveChain:
    case MessageKind::PathActiveRequest: msg.body = ChainBody{r.chain()}; break;
    case MessageKind::StatsRequest:
    case MessageKind::Rebalance: msg.body = EmptyBody{}; break;
    case MessageKind::StatsReply: {
      StatsBody body;
      body.window.length_s = r.f64();
      const auto n = r.count(12);
      for (std::uint32_t i = 0; i < n; ++i) {
        const auto id = r.chain();
        body.window.bytes[id] = r.u64();
      }
      msg.body = std::move(body);
      break;
    }
    case MessageKind::PathActiveReply: msg.body = PathActiveBody{r.u8() != 0}; break;
    case MessageKind::AllocationCommit: {
      CommitBody body;
      const auto phase = r.u8();
      if (phase < 1 || phase > 3) throw Error(Errc::Decode, "bad commit phase");
      body.phase = static_cast<CommitPhase>(phase);
      body.plan = read_plan(r);
      msg.body = std::move(body);
      break;
    }
    case MessageKind::Ack: {
      AckBody body;
      body.ok = r.u8() != 0;
      const auto code = r.u8();
      if (code > static_cast<std::uint8_t>(Errc::Decode)) throw Error(Errc::Decode, "bad error code");
      body.error = static_cast<Errc>(code);
      body.generation = r.u64();
      body.digest = r.u64();
      body.detail = r.str();
      msg.body = std::move(body);
      break;
    }
  }
  if (!r.done()) throw Error(Errc::Decode, "trailing bytes");
  return msg;
}

}  // namespace nfscale
