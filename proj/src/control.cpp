#include "nfscale/control.hpp"

#include <algorithm>

namespace nfscale {

namespace {

std::uint64_t fnv(const Bytes& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (auto b : bytes) {
    h ^= b;
    h *= 0x100000001b3ULL;
  }
  return h;
}

void validate_config(const ClusterConfig& cfg) {
  cfg.hash.validate();
  if (!(cfg.session_timeout_s > 0.0)) throw Error(Errc::InvalidArgument, "session timeout must be positive");
  if (!(cfg.window_s > 0.0)) throw Error(Errc::InvalidArgument, "window must be positive");
  if (cfg.chains.empty()) throw Error(Errc::InvalidArgument, "config lists no chains");
  if (cfg.chains.size() > cfg.hash.max_chains) throw Error(Errc::TooManyChains, "initial chains exceed max_chains");
  for (std::size_t i = 0; i < cfg.chains.size(); ++i) {
    for (std::size_t j = i + 1; j < cfg.chains.size(); ++j) {
      if (cfg.chains[i].shares_tag_with(cfg.chains[j])) {
        throw Error(Errc::DuplicateTags, cfg.chains[i].to_string() + " and " + cfg.chains[j].to_string());
      }
    }
  }
}

const AckBody& ack_of(const ControlMessage& reply) {
  if (reply.kind != MessageKind::Ack) throw Error(Errc::Decode, "expected Ack");
  return std::get<AckBody>(reply.body);
}

// Turns a negative ack into the error it carries.
void throw_if_nack(const ControlMessage& reply) {
  if (reply.kind != MessageKind::Ack) return;
  const auto& ack = std::get<AckBody>(reply.body);
  if (!ack.ok) throw Error(ack.error, ack.detail);
}

template <typename Fn>
ControlMessage guarded(const ControlMessage& msg, Fn&& fn) {
  try {
    return fn();
  } catch (const Error& e) {
    return make_nack(msg.seq, msg.time, e);
  }
}

}  // namespace

// ---------------------------------------------------------------- Channel

Channel::Channel(std::string name, MessageTrace* trace) : name_(std::move(name)), trace_(trace) {}

void Channel::log(const ControlMessage& msg, const Bytes& wire, bool reply) {
  if (!trace_) return;
  trace_->record(TraceEntry{msg.time, name_, reply, msg.kind, msg.seq, wire.size(), fnv(wire)});
}

std::optional<ControlMessage> Channel::call(const ControlMessage& request) {
  if (!up()) return std::nullopt;
  const Bytes out = encode(request);
  log(request, out, false);
  const ControlMessage reply = handler_(decode(out));
  const Bytes back = encode(reply);
  if (drop_ && drop_(request)) return std::nullopt;
  log(reply, back, true);
  ControlMessage decoded = decode(back);
  if (decoded.kind != reply_kind(request.kind)) {
    throw Error(Errc::Decode, std::string("unexpected reply ") + std::string(kind_name(decoded.kind)));
  }
  return decoded;
}

// ---------------------------------------------------------------- SlaveNode

SlaveNode::SlaveNode(std::optional<ClusterConfig> pinned) : pinned_(std::move(pinned)) {}

Balancer& SlaveNode::balancer() {
  if (!balancer_) throw Error(Errc::HandshakeRequired, "slave not configured");
  return *balancer_;
}

const ClusterConfig& SlaveNode::config() const {
  if (!config_) throw Error(Errc::HandshakeRequired, "slave not configured");
  return *config_;
}

ControlMessage SlaveNode::handle(const ControlMessage& msg) {
  return guarded(msg, [&]() -> ControlMessage {
    switch (msg.kind) {
      case MessageKind::Handshake: {
        const auto& cfg = std::get<HandshakeBody>(msg.body).config;
        if (pinned_ && !(*pinned_ == cfg)) throw Error(Errc::ConfigMismatch, "slave is pinned to another config");
        validate_config(cfg);
        auto fresh = std::make_unique<Balancer>(Role::Slave, cfg.hash, cfg.session_timeout_s);
        Plan plan = plan_initial(cfg.chains, cfg.hash.buckets, 1);
        fresh->commit(fresh->prepare(plan));
        balancer_ = std::move(fresh);
        config_ = cfg;
        current_ = std::move(plan);
        previous_.reset();
        staged_.reset();
        committed_ = {1};
        return make_ack(msg.seq, msg.time, 1, config_digest(cfg));
      }
      case MessageKind::AllocationCommit:
        return on_commit(msg, std::get<CommitBody>(msg.body));
      case MessageKind::StatsRequest:
        return make_stats_reply(msg.seq, msg.time, balancer().snapshot_window(msg.time));
      case MessageKind::PathActiveRequest:
        return make_path_active_reply(msg.seq, msg.time,
                                      balancer().path_active(std::get<ChainBody>(msg.body).chain, msg.time));
      default:
        throw Error(Errc::InvalidArgument, std::string("slave does not serve ") + std::string(kind_name(msg.kind)));
    }
  });
}

ControlMessage SlaveNode::on_commit(const ControlMessage& msg, const CommitBody& body) {
  Balancer& b = balancer();
  const auto gen = body.plan.generation;
  switch (body.phase) {
    case CommitPhase::Prepare:
      staged_ = b.prepare(body.plan);
      break;
    case CommitPhase::Commit:
      if (!staged_ || staged_->plan.generation != gen) {
        throw Error(Errc::InvalidArgument, "commit for unprepared generation " + std::to_string(gen));
      }
      previous_ = current_;
      current_ = staged_->plan;
      b.commit(std::move(*staged_));
      staged_.reset();
      committed_.push_back(gen);
      break;
    case CommitPhase::Abort:
      if (staged_ && staged_->plan.generation == gen) {
        staged_.reset();
      } else if (current_ && current_->generation == gen && previous_) {
        b.commit(b.prepare(*previous_));
        current_ = previous_;
        previous_.reset();
        committed_.pop_back();
      }
      break;
  }
  return make_ack(msg.seq, msg.time, b.generation());
}

// ---------------------------------------------------------------- MasterNode

MasterNode::MasterNode(Channel& to_slave) : to_slave_(to_slave) {}

Balancer& MasterNode::balancer() {
  if (!balancer_) throw Error(Errc::HandshakeRequired, "master not configured");
  return *balancer_;
}

const ClusterConfig& MasterNode::config() const {
  if (!config_) throw Error(Errc::HandshakeRequired, "master not configured");
  return *config_;
}

void MasterNode::require_ready() const {
  if (!balancer_) throw Error(Errc::HandshakeRequired, "handshake has not completed");
}

ControlMessage MasterNode::call_slave(const ControlMessage& msg) {
  auto reply = to_slave_.call(msg);
  if (!reply) throw Error(Errc::SlaveUnreachable, std::string(kind_name(msg.kind)) + " got no reply");
  return *reply;
}

void MasterNode::handshake(const ClusterConfig& cfg, double now) {
  validate_config(cfg);
  const auto reply = call_slave(make_handshake(++seq_, now, cfg));
  throw_if_nack(reply);
  if (ack_of(reply).digest != config_digest(cfg)) throw Error(Errc::ConfigMismatch, "slave echoed another config");

  auto fresh = std::make_unique<Balancer>(Role::Master, cfg.hash, cfg.session_timeout_s);
  fresh->commit(fresh->prepare(plan_initial(cfg.chains, cfg.hash.buckets, 1)));
  balancer_ = std::move(fresh);
  config_ = cfg;
  next_generation_ = 2;
  committed_ = {1};
  last_window_ = TrafficWindow{cfg.window_s, {}};
}

void MasterNode::two_phase(Plan plan, double now) {
  const auto gen = plan.generation;
  auto abort = [&] { to_slave_.call(make_commit(++seq_, now, CommitPhase::Abort, plan)); };

  const auto prepared_reply = to_slave_.call(make_commit(++seq_, now, CommitPhase::Prepare, plan));
  if (!prepared_reply) {
    abort();
    throw Error(Errc::BarrierTimeout, "prepare of generation " + std::to_string(gen) + " not acknowledged");
  }
  throw_if_nack(*prepared_reply);
  PreparedPlan local = balancer_->prepare(plan);

  const auto commit_reply = to_slave_.call(make_commit(++seq_, now, CommitPhase::Commit, plan));
  if (!commit_reply) {
    abort();
    throw Error(Errc::BarrierTimeout, "commit of generation " + std::to_string(gen) + " not acknowledged");
  }
  throw_if_nack(*commit_reply);
  balancer_->commit(std::move(local));
  committed_.push_back(gen);
}

void MasterNode::add_chain(const ChainId& chain, double now) {
  require_ready();
  auto in_use = balancer_->live_chains();
  for (const auto& d : balancer_->draining()) in_use.push_back(d);
  for (const auto& other : in_use) {
    if (other.shares_tag_with(chain)) {
      throw Error(Errc::DuplicateTags, chain.to_string() + " overlaps " + other.to_string());
    }
  }
  if (in_use.size() + 1 > config_->hash.max_chains) {
    throw Error(Errc::TooManyChains, "max_chains is " + std::to_string(config_->hash.max_chains));
  }
  two_phase(plan_add(balancer_->profile(), last_window_, chain, config_->hash.buckets, next_generation_++), now);
}

void MasterNode::remove_chain(const ChainId& chain, double now) {
  require_ready();
  two_phase(plan_remove(balancer_->profile(), last_window_, chain, config_->hash.buckets, next_generation_++), now);
}

void MasterNode::rebalance(double now) {
  require_ready();
  two_phase(plan_rebalance(balancer_->profile(), last_window_, config_->hash.buckets, next_generation_++), now);
}

TrafficWindow MasterNode::poll_stats(double now) {
  require_ready();
  TrafficWindow merged = balancer_->snapshot_window(now);
  const auto reply = call_slave(make_empty(MessageKind::StatsRequest, ++seq_, now));
  throw_if_nack(reply);
  merge_into(merged, std::get<StatsBody>(reply.body).window);
  last_window_ = merged;
  return merged;
}

ControlMessage MasterNode::handle(const ControlMessage& msg) {
  return guarded(msg, [&]() -> ControlMessage {
    switch (msg.kind) {
      case MessageKind::Handshake:
        handshake(std::get<HandshakeBody>(msg.body).config, msg.time);
        return make_ack(msg.seq, msg.time, 1, config_digest(*config_));
      case MessageKind::AddChain:
        add_chain(std::get<ChainBody>(msg.body).chain, msg.time);
        return make_ack(msg.seq, msg.time, balancer_->generation());
      case MessageKind::RemoveChain:
        remove_chain(std::get<ChainBody>(msg.body).chain, msg.time);
        return make_ack(msg.seq, msg.time, balancer_->generation());
      case MessageKind::Rebalance:
        rebalance(msg.time);
        return make_ack(msg.seq, msg.time, balancer_->generation());
      case MessageKind::StatsRequest:
        return make_stats_reply(msg.seq, msg.time, poll_stats(msg.time));
      case MessageKind::PathActiveRequest:
        require_ready();
        return make_path_active_reply(msg.seq, msg.time,
                                      balancer_->path_active(std::get<ChainBody>(msg.body).chain, msg.time));
      default:
        throw Error(Errc::InvalidArgument, std::string("master does not serve ") + std::string(kind_name(msg.kind)));
    }
  });
}

// ---------------------------------------------------------------- ManagementSystem

ManagementSystem::ManagementSystem(Channel& to_master, Channel& to_slave)
    : to_master_(to_master), to_slave_(to_slave) {}

ControlMessage ManagementSystem::request(Channel& channel, const ControlMessage& msg) {
  auto reply = channel.call(msg);
  if (!reply) {
    throw Error(&channel == &to_master_ ? Errc::PeerUnreachable : Errc::SlaveUnreachable,
                std::string(kind_name(msg.kind)) + " got no reply");
  }
  throw_if_nack(*reply);
  return *reply;
}

void ManagementSystem::start(const ClusterConfig& cfg, double now) {
  request(to_master_, make_handshake(++seq_, now, cfg));
  known_ = {cfg.chains.begin(), cfg.chains.end()};
  removed_.clear();
  reclaimable_.clear();
}

void ManagementSystem::add_chain(const ChainId& chain, double now) {
  request(to_master_, make_chain(MessageKind::AddChain, ++seq_, now, chain));
  known_.insert(chain);
}

void ManagementSystem::remove_chain(const ChainId& chain, double now) {
  if (!known_.contains(chain) || removed_.contains(chain)) throw Error(Errc::UnknownChain, chain.to_string());
  request(to_master_, make_chain(MessageKind::RemoveChain, ++seq_, now, chain));
  removed_.insert(chain);
}

bool ManagementSystem::poll_path_active(const ChainId& chain, double now) {
  if (!known_.contains(chain)) throw Error(Errc::UnknownChain, chain.to_string());
  const auto master = request(to_master_, make_chain(MessageKind::PathActiveRequest, ++seq_, now, chain));
  const auto slave = request(to_slave_, make_chain(MessageKind::PathActiveRequest, ++seq_, now, chain));
  const bool active =
      std::get<PathActiveBody>(master.body).active || std::get<PathActiveBody>(slave.body).active;
  if (!active && removed_.contains(chain)) reclaimable_.insert(chain);
  return active;
}

TrafficWindow ManagementSystem::poll_stats(double now) {
  const auto reply = request(to_master_, make_empty(MessageKind::StatsRequest, ++seq_, now));
  return std::get<StatsBody>(reply.body).window;
}

void ManagementSystem::request_rebalance(double now) {
  request(to_master_, make_empty(MessageKind::Rebalance, ++seq_, now));
}

// ---------------------------------------------------------------- Cluster

Cluster::Cluster(std::optional<ClusterConfig> slave_pinned)
    : ms_to_master("ms->master", &trace),
      ms_to_slave("ms->slave", &trace),
      master_to_slave("master->slave", &trace),
      slave(std::move(slave_pinned)),
      master(master_to_slave),
      ms(ms_to_master, ms_to_slave) {
  ms_to_master.connect([this](const ControlMessage& m) { return master.handle(m); });
  ms_to_slave.connect([this](const ControlMessage& m) { return slave.handle(m); });
  master_to_slave.connect([this](const ControlMessage& m) { return slave.handle(m); });
}

}  // namespace nfscale
