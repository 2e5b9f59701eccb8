#include "nfscale/netsim.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <unordered_map>

#include "nfscale/control.hpp"

namespace nfscale {

std::string_view action_name(ActionKind kind) noexcept {
  switch (kind) {
    case ActionKind::Add: return "add";
    case ActionKind::Remove: return "remove";
    case ActionKind::Rebalance: return "rebalance";
  }
  return "?";
}

std::vector<ChainId> Scenario::declared() const {
  std::vector<ChainId> out = cluster.chains;
  out.insert(out.end(), standby.begin(), standby.end());
  return out;
}

double Scenario::effective_horizon() const {
  if (horizon_s > 0.0) return horizon_s;
  double end = 0.0;
  for (const auto& s : generate_sessions(traffic, seed)) end = std::max(end, s.start + s.duration);
  for (const auto& a : actions) end = std::max(end, a.at);
  return std::ceil(end + cluster.session_timeout_s + 1.0);
}

void Scenario::validate() const {
  auto fail = [](const std::string& field, const std::string& what) {
    return Error(Errc::ScenarioInvalid, field + ": " + what);
  };
  auto wrap = [&](const std::string& field, auto&& fn) {
    try {
      fn();
    } catch (const Error& e) {
      if (e.code() == Errc::ScenarioInvalid) throw;
      throw fail(field, e.what());
    }
  };

  wrap("hash", [&] { cluster.hash.validate(); });
  if (!(cluster.session_timeout_s > 0.0)) throw fail("session_timeout", "must be positive");
  if (!(cluster.window_s > 0.0)) throw fail("window", "must be positive");
  if (cluster.chains.empty()) throw fail("chains", "at least one initial chain is required");
  wrap("traffic", [&] { traffic.validate(); });
  wrap("nf", [&] { nf.validate(); });
  if (!(hop_latency_s > 0.0)) throw fail("hop_latency", "must be positive");
  if (!(stats_interval_s >= 0.0)) throw fail("stats_interval", "must be non-negative");
  if (!(poll_interval_s > 0.0)) throw fail("poll_interval", "must be positive");
  if (!(expire_interval_s > 0.0)) throw fail("expire_interval", "must be positive");
  if (!(horizon_s >= 0.0)) throw fail("horizon", "must be non-negative");

  const auto all = declared();
  if (all.size() > cluster.hash.max_chains) {
    throw fail("chains", std::to_string(all.size()) + " chains declared, max_chains is " +
                             std::to_string(cluster.hash.max_chains));
  }
  for (std::size_t i = 0; i < all.size(); ++i) {
    for (std::size_t j = i + 1; j < all.size(); ++j) {
      if (all[i].shares_tag_with(all[j])) {
        const auto field = j < cluster.chains.size() ? "chains[" + std::to_string(j) + "]"
                                                      : "standby[" + std::to_string(j - cluster.chains.size()) + "]";
        throw fail(field, all[j].to_string() + " reuses a tag of " + all[i].to_string());
      }
    }
  }

  std::set<ChainId> live(cluster.chains.begin(), cluster.chains.end());
  std::set<ChainId> used = live;
  double previous = 0.0;
  const double horizon = effective_horizon();
  for (std::size_t i = 0; i < actions.size(); ++i) {
    const auto& a = actions[i];
    const auto field = "actions[" + std::to_string(i) + "]";
    if (!(a.at >= previous)) throw fail(field + ".at", "actions must be sorted by time");
    if (!(a.at < horizon)) throw fail(field + ".at", "after the horizon");
    previous = a.at;
    if (a.kind == ActionKind::Rebalance) {
      if (a.chain) throw fail(field + ".chain", "rebalance takes no chain");
      continue;
    }
    if (!a.chain) throw fail(field + ".chain", "missing");
    if (std::find(all.begin(), all.end(), *a.chain) == all.end()) {
      throw fail(field + ".chain", a.chain->to_string() + " is not declared");
    }
    if (a.kind == ActionKind::Add) {
      if (used.contains(*a.chain)) throw fail(field + ".chain", a.chain->to_string() + " was already used");
      live.insert(*a.chain);
      used.insert(*a.chain);
    } else {
      if (!live.contains(*a.chain)) throw fail(field + ".chain", a.chain->to_string() + " is not live");
      if (live.size() == 1) throw fail(field + ".chain", "cannot remove the last chain");
      live.erase(*a.chain);
    }
  }
}

namespace {

enum class Node : std::uint8_t { ClientHost, ServerHost, ClientEdge, ServerEdge, Master, Slave, Branch, Nf };

struct Place {
  Node node = Node::ClientHost;
  std::uint16_t index = 0;
  std::uint16_t port = 0;
};

enum class EventKind : std::uint8_t { Arrive, Inject, Action, StatsTick, ExpireTick, PollTick, DrainProbe };

struct Event {
  double t = 0.0;
  std::uint64_t seq = 0;
  EventKind kind = EventKind::Arrive;
  Place at;
  Frame frame;
  std::uint32_t a = 0;  // session, action or drain index
  std::uint32_t b = 0;  // packet index within the session
};

struct Later {
  bool operator()(const Event& x, const Event& y) const noexcept {
    if (x.t != y.t) return x.t > y.t;
    return x.seq > y.seq;
  }
};

struct SessionState {
  std::vector<TrafficPacket> packets;
  bool released = false;
  SessionOutcome outcome;
  bool mapped_by_master = false;
};

constexpr std::size_t kLogLimitPerReason = 200;

class Simulator {
 public:
  explicit Simulator(const Scenario& sc)
      : sc_(sc),
        chains_(sc.declared()),
        horizon_(sc.effective_horizon()),
        client_edge_(edge_switch_rules(chains_, Edge::Client)),
        server_edge_(edge_switch_rules(chains_, Edge::Server)) {
    result_.series = ThroughputSeries(chains_, static_cast<std::size_t>(std::ceil(horizon_)));
    result_.series.scenario = sc.name;
    result_.series.seed = sc.seed;
    for (const auto& c : chains_) {
      branches_.push_back(branch_switch_rules(c));
      nfs_.emplace_back(c, sc.nf);
      by_tag_.emplace(c.forward_tag(), c);
      by_tag_.emplace(c.reverse_tag(), c);
    }
  }

  RunResult run() {
    start_cluster();
    schedule_traffic();
    for (std::uint32_t i = 0; i < sc_.actions.size(); ++i) push(sc_.actions[i].at, EventKind::Action, i);
    const double stats = sc_.stats_interval_s > 0.0 ? sc_.stats_interval_s : sc_.cluster.window_s;
    push(stats, EventKind::StatsTick);
    push(sc_.expire_interval_s, EventKind::ExpireTick);
    push(sc_.poll_interval_s, EventKind::PollTick);

    while (!queue_.empty() && queue_.top().t <= horizon_) {
      Event e = queue_.top();
      queue_.pop();
      now_ = e.t;
      dispatch(e);
    }
    finish();
    return std::move(result_);
  }

 private:
  // ------------------------------------------------------------ scheduling

  void push(double t, EventKind kind, std::uint32_t a = 0, std::uint32_t b = 0) {
    Event e;
    e.t = t;
    e.seq = seq_++;
    e.kind = kind;
    e.a = a;
    e.b = b;
    queue_.push(std::move(e));
  }

  void send(Place from, const Frame& frame, double t) {
    Event e;
    e.t = t + sc_.hop_latency_s;
    e.seq = seq_++;
    e.kind = EventKind::Arrive;
    e.at = peer(from);
    e.frame = frame;
    queue_.push(std::move(e));
  }

  Place peer(Place from) {
    const auto i = from.index;
    switch (from.node) {
      case Node::ClientHost: return {Node::ClientEdge, 0, port::kHost};
      case Node::ServerHost: return {Node::ServerEdge, 0, port::kHost};
      case Node::Master: return {Node::ClientEdge, 0, port::kFromBalancer};
      case Node::Slave: return {Node::ServerEdge, 0, port::kFromBalancer};
      case Node::ClientEdge:
      case Node::ServerEdge: {
        const bool client = from.node == Node::ClientEdge;
        if (from.port == port::kHost) return {client ? Node::ClientHost : Node::ServerHost, 0, 0};
        if (from.port == port::kToBalancer) return {client ? Node::Master : Node::Slave, 0, 0};
        if (from.port >= port::kFirstBranch && static_cast<std::size_t>(from.port - port::kFirstBranch) < chains_.size()) {
          return {Node::Branch, static_cast<std::uint16_t>(from.port - port::kFirstBranch),
                  client ? port::kClientSide : port::kServerSide};
        }
        break;
      }
      case Node::Branch:
        switch (from.port) {
          case port::kClientSide: return {Node::ClientEdge, 0, static_cast<std::uint16_t>(port::kFirstBranch + i)};
          case port::kServerSide: return {Node::ServerEdge, 0, static_cast<std::uint16_t>(port::kFirstBranch + i)};
          case port::kNfIn: return {Node::Nf, i, 0};
          case port::kNfOut: return {Node::Nf, i, 1};
          default: break;
        }
        break;
      case Node::Nf: return {Node::Branch, i, from.port == 0 ? port::kNfIn : port::kNfOut};
    }
    throw Error(Errc::NoRoute, "port " + std::to_string(from.port) + " is not cabled");
  }

  // ------------------------------------------------------------ setup

  void start_cluster() {
    cluster_.ms.start(sc_.cluster, 0.0);
    log(0.0, "handshake", {{"chains", chain_names(sc_.cluster.chains)},
                           {"generation", cluster_.master.balancer().generation()},
                           {"digest", config_digest(sc_.cluster)}});
    check_vectors(0.0);
  }

  void schedule_traffic() {
    const auto specs = generate_sessions(sc_.traffic, sc_.seed);
    sessions_.resize(specs.size());
    for (std::size_t i = 0; i < specs.size(); ++i) {
      auto& st = sessions_[i];
      st.packets = packetize(specs[i]);
      st.outcome.id = specs[i].id;
      st.outcome.start = specs[i].start;
      st.outcome.reversed = specs[i].reversed;
      for (std::uint32_t k = 0; k < st.packets.size(); ++k) {
        const auto& p = st.packets[k];
        const bool eager = p.dir == Direction::Forward || (specs[i].reversed && p.index == 0);
        if (eager) push(p.packet.timestamp, EventKind::Inject, static_cast<std::uint32_t>(i), k);
      }
    }
  }

  // ------------------------------------------------------------ dispatch

  void dispatch(const Event& e) {
    switch (e.kind) {
      case EventKind::Inject: inject(e.a, e.b); break;
      case EventKind::Arrive: arrive(e); break;
      case EventKind::Action: act(sc_.actions[e.a]); break;
      case EventKind::StatsTick: {
        const auto w = cluster_.ms.poll_stats(now_);
        nlohmann::ordered_json bytes = nlohmann::ordered_json::object();
        for (const auto& [c, b] : w.bytes) bytes[std::to_string(c.forward_tag())] = b;
        log(now_, "stats", {{"total", w.total()}, {"bytes", bytes}});
        push(now_ + (sc_.stats_interval_s > 0.0 ? sc_.stats_interval_s : sc_.cluster.window_s), EventKind::StatsTick);
        break;
      }
      case EventKind::ExpireTick:
        cluster_.master.balancer().expire_sessions(now_);
        cluster_.slave.balancer().expire_sessions(now_);
        push(now_ + sc_.expire_interval_s, EventKind::ExpireTick);
        break;
      case EventKind::PollTick:
        poll_drains();
        push(now_ + sc_.poll_interval_s, EventKind::PollTick);
        break;
      case EventKind::DrainProbe: probe(e.a); break;
    }
  }

  void inject(std::uint32_t session, std::uint32_t index) {
    const auto& p = sessions_[session].packets[index];
    Frame f;
    f.src = p.packet.src;
    f.dst = p.packet.dst;
    f.bytes = p.packet.bytes;
    f.session = session;
    f.dir = p.dir;
    result_.counters.injected_bytes += f.bytes;
    ++result_.counters.packets;
    send({p.dir == Direction::Forward ? Node::ClientHost : Node::ServerHost, 0, 0}, f, now_);
  }

  void arrive(const Event& e) {
    switch (e.at.node) {
      case Node::ClientEdge: forward(e.at, client_edge_, e.frame); break;
      case Node::ServerEdge: forward(e.at, server_edge_, e.frame); break;
      case Node::Branch:
        if ((e.at.port == port::kClientSide || e.at.port == port::kServerSide) && e.frame.depth != 1) {
          anomaly("tag_depth", e.frame, {{"depth", e.frame.depth}, {"chain", chains_[e.at.index].to_string()}});
        }
        forward(e.at, branches_[e.at.index], e.frame);
        break;
      case Node::Master: balancer(Role::Master, e.frame); break;
      case Node::Slave: balancer(Role::Slave, e.frame); break;
      case Node::Nf: nf(e.at, e.frame); break;
      case Node::ClientHost:
      case Node::ServerHost: deliver(e.at.node, e.frame); break;
    }
  }

  void forward(Place at, const TagRouter& router, const Frame& frame) {
    try {
      const auto routed = route(router, at.port, frame);
      send({at.node, at.index, routed.port}, routed.frame, now_);
    } catch (const Error& e) {
      if (e.code() != Errc::NoRoute && e.code() != Errc::EmptyTagStack) throw;
      ++result_.counters.no_route;
      drop(frame);
      anomaly("no_route", frame, {{"node", node_name(at.node)}, {"port", at.port}, {"detail", e.what()}});
    }
  }

  void balancer(Role role, const Frame& frame) {
    const bool master = role == Role::Master;
    Balancer& self = master ? cluster_.master.balancer() : cluster_.slave.balancer();
    Balancer& other = master ? cluster_.slave.balancer() : cluster_.master.balancer();
    auto& st = sessions_[frame.session];
    const Place out{master ? Node::Master : Node::Slave, 0, 1};

    if (!frame.tagged()) {
      const LogicalPacket p{frame.src, frame.dst, frame.bytes, now_, {}};
      Assignment a;
      try {
        a = self.map_packet_traced(p);
      } catch (const Error& e) {
        drop(frame);
        anomaly("map_failed", frame, {{"detail", e.what()}});
        return;
      }
      if (a.generation != other.generation()) {
        anomaly("generation_skew", frame, {{"here", a.generation}, {"peer", other.generation()}});
      }
      if (master && !st.mapped_by_master) {
        st.mapped_by_master = true;
        st.outcome.master_choice = a.chain;
        st.outcome.first_mapped = now_;
      }
      touched(a.chain, frame);
      send(out, push_tag(frame, master ? a.chain.forward_tag() : a.chain.reverse_tag()), now_);
      return;
    }

    const auto tag = *frame.outer_tag();
    const auto it = by_tag_.find(tag);
    const bool expected = it != by_tag_.end() &&
                          (master ? it->second.reverse_tag() == tag : it->second.forward_tag() == tag);
    if (!expected) {
      ++result_.counters.no_route;
      drop(frame);
      anomaly("unexpected_tag", frame, {{"tag", tag}, {"at", master ? "master" : "slave"}});
      return;
    }
    const ChainId chain = it->second;
    const auto obs = self.observe(frame.key(), chain, now_);
    if (obs == Observation::Corrected) {
      ++result_.counters.corrected;
      if (!st.outcome.reversed) anomaly("direction_mismatch", frame, {{"chain", chain.to_string()}});
    } else if (obs == Observation::Diverged) {
      ++result_.counters.diverged;
      if (!st.outcome.reversed) anomaly("slave_divergence", frame, {{"chain", chain.to_string()}});
    }
    touched(chain, frame);
    send(out, pop_tag(frame), now_);
  }

  void nf(Place at, const Frame& frame) {
    auto& inst = nfs_[at.index];
    double departure = now_;
    try {
      departure = inst.process(frame, now_);
    } catch (const Error& e) {
      drop(frame);
      if (e.code() == Errc::QueueOverflow) {
        ++result_.counters.overflow;
        limited_log("overflow", frame, {{"chain", inst.id().to_string()}});
      } else {
        anomaly("tagged_at_nf", frame, {{"chain", inst.id().to_string()}});
      }
      return;
    }
    result_.series.add(inst.id(), departure, frame.bytes);

    auto& out = sessions_[frame.session].outcome;
    if (!out.first_chain) {
      out.first_chain = inst.id();
    } else if (*out.first_chain != inst.id() && out.single_chain) {
      out.single_chain = false;
      if (!out.reversed) anomaly("chain_switch", frame, {{"from", out.first_chain->to_string()}, {"to", inst.id().to_string()}});
    }
    send({Node::Nf, at.index, static_cast<std::uint16_t>(at.port == 0 ? 1 : 0)}, frame, departure);
  }

  void deliver(Node host, const Frame& frame) {
    if (frame.tagged()) anomaly("tagged_at_host", frame, {});
    result_.counters.delivered_bytes += frame.bytes;
    auto& st = sessions_[frame.session];
    ++st.outcome.delivered_packets;

    if (host == Node::ServerHost && !st.released) {
      st.released = true;
      for (std::uint32_t k = 0; k < st.packets.size(); ++k) {
        const auto& p = st.packets[k];
        if (p.dir != Direction::Reverse || (st.outcome.reversed && p.index == 0)) continue;
        push(std::max(p.packet.timestamp, now_ + sc_.traffic.think_s), EventKind::Inject, frame.session, k);
      }
    }
    if (st.outcome.delivered_packets == st.packets.size()) {
      const auto m = cluster_.master.balancer().record(frame.key());
      const auto s = cluster_.slave.balancer().record(frame.key());
      st.outcome.agreed = m && s && m->assigned == s->assigned;
    }
  }

  void drop(const Frame& frame) { result_.counters.dropped_bytes += frame.bytes; }

  // ------------------------------------------------------------ control

  void act(const Action& a) {
    CommitOutcome c;
    c.at = now_;
    c.kind = a.kind;
    c.chain = a.chain;
    c.live_before = cluster_.master.balancer().live_chains().size();
    try {
      switch (a.kind) {
        case ActionKind::Add: cluster_.ms.add_chain(*a.chain, now_); break;
        case ActionKind::Remove: cluster_.ms.remove_chain(*a.chain, now_); break;
        case ActionKind::Rebalance: cluster_.ms.request_rebalance(now_); break;
      }
      c.ok = true;
    } catch (const Error& e) {
      ++result_.counters.anomalies;
      log(now_, "control_error", {{"action", action_name(a.kind)}, {"detail", e.what()}});
    }
    c.generation = cluster_.master.balancer().generation();
    c.live_after = cluster_.master.balancer().live_chains();
    if (c.ok) {
      nlohmann::ordered_json alloc = nlohmann::ordered_json::object();
      const auto bv = cluster_.master.balancer().buckets();
      for (const auto& id : c.live_after) alloc[std::to_string(id.forward_tag())] = bv->count(id);
      log(now_, "commit", {{"action", action_name(a.kind)},
                           {"chain", a.chain ? nlohmann::ordered_json(a.chain->to_string()) : nlohmann::ordered_json()},
                           {"generation", c.generation},
                           {"buckets", alloc}});
      check_vectors(now_);
      if (a.kind == ActionKind::Remove) {
        DrainOutcome d;
        d.chain = *a.chain;
        d.removed_at = now_;
        if (const auto it = last_touch_.find(d.chain); it != last_touch_.end()) d.last_packet = it->second;
        result_.drains.push_back(d);
        draining_.push_back(result_.drains.size() - 1);
        probe(static_cast<std::uint32_t>(result_.drains.size() - 1));
      }
    }
    result_.commits.push_back(std::move(c));
  }

  void check_vectors(double t) {
    if (*cluster_.master.balancer().buckets() == *cluster_.slave.balancer().buckets()) return;
    result_.buckets_always_equal = false;
    ++result_.counters.anomalies;
    log(t, "anomaly", {{"reason", "vector_mismatch"}});
  }

  // Records that a balancer handled a packet of `chain`; feeds the exact idle probe.
  void touched(const ChainId& chain, const Frame& frame) {
    if (reclaimed_.contains(chain)) anomaly("stale_after_reclaim", frame, {{"chain", chain.to_string()}});
    last_touch_[chain] = now_;
    for (const auto i : draining_) {
      auto& d = result_.drains[i];
      if (d.chain != chain || d.inactive_at >= 0.0) continue;
      d.last_packet = now_;
      if (!probe_pending_.contains(i)) {
        probe_pending_.insert(i);
        push(now_ + sc_.cluster.session_timeout_s, EventKind::DrainProbe, i);
      }
    }
  }

  void probe(std::uint32_t i) {
    probe_pending_.erase(i);
    auto& d = result_.drains[i];
    if (d.inactive_at >= 0.0) return;
    const bool active = cluster_.master.balancer().path_active(d.chain, now_) ||
                        cluster_.slave.balancer().path_active(d.chain, now_);
    if (!active) {
      d.inactive_at = now_;
      log(now_, "path_idle", {{"chain", d.chain.to_string()}, {"last_packet", d.last_packet}});
      return;
    }
    const double next = d.last_packet + sc_.cluster.session_timeout_s;
    if (!(next > now_)) throw Error(Errc::InvalidArgument, "path active past its last packet plus the timeout");
    probe_pending_.insert(i);
    push(next, EventKind::DrainProbe, i);
  }

  void poll_drains() {
    for (auto it = draining_.begin(); it != draining_.end();) {
      auto& d = result_.drains[*it];
      if (cluster_.ms.poll_path_active(d.chain, now_)) {
        ++it;
        continue;
      }
      d.reclaimed_at = now_;
      cluster_.master.balancer().release(d.chain);
      cluster_.slave.balancer().release(d.chain);
      reclaimed_.insert(d.chain);
      log(now_, "reclaim", {{"chain", d.chain.to_string()}});
      it = draining_.erase(it);
    }
  }

  // ------------------------------------------------------------ bookkeeping

  void finish() {
    std::uint64_t in_flight = 0;
    while (!queue_.empty()) {
      const auto& e = queue_.top();
      if (e.kind == EventKind::Arrive) in_flight += e.frame.bytes;
      queue_.pop();
    }
    auto& k = result_.counters;
    k.in_flight_bytes = in_flight;
    if (k.injected_bytes != k.delivered_bytes + k.dropped_bytes + k.in_flight_bytes) {
      ++k.anomalies;
      log(horizon_, "anomaly", {{"reason", "conservation"},
                                {"injected", k.injected_bytes},
                                {"delivered", k.delivered_bytes},
                                {"dropped", k.dropped_bytes},
                                {"in_flight", k.in_flight_bytes}});
    }
    for (const auto& st : sessions_) result_.sessions.push_back(st.outcome);
    log(horizon_, "summary", {{"injected", k.injected_bytes},
                              {"delivered", k.delivered_bytes},
                              {"dropped", k.dropped_bytes},
                              {"in_flight", k.in_flight_bytes},
                              {"corrected", k.corrected},
                              {"diverged", k.diverged},
                              {"anomalies", k.anomalies}});
  }

  void anomaly(const std::string& reason, const Frame& frame, nlohmann::ordered_json data) {
    ++result_.counters.anomalies;
    data["reason"] = reason;
    limited_log("anomaly", frame, std::move(data), reason);
  }

  void limited_log(const std::string& kind, const Frame& frame, nlohmann::ordered_json data, std::string key = {}) {
    if (key.empty()) key = kind;
    if (++log_counts_[key] > kLogLimitPerReason) return;
    data["session"] = frame.session;
    data["dir"] = frame.dir == Direction::Forward ? "fwd" : "rev";
    log(now_, kind, std::move(data));
  }

  void log(double t, std::string kind, nlohmann::ordered_json data) {
    result_.log.push_back(LogRecord{t, std::move(kind), std::move(data)});
  }

  static nlohmann::ordered_json chain_names(const std::vector<ChainId>& chains) {
    auto out = nlohmann::ordered_json::array();
    for (const auto& c : chains) out.push_back(c.to_string());
    return out;
  }

  static const char* node_name(Node n) {
    switch (n) {
      case Node::ClientHost: return "client";
      case Node::ServerHost: return "server";
      case Node::ClientEdge: return "client_edge";
      case Node::ServerEdge: return "server_edge";
      case Node::Master: return "master";
      case Node::Slave: return "slave";
      case Node::Branch: return "branch";
      case Node::Nf: return "nf";
    }
    return "?";
  }

  const Scenario& sc_;
  const std::vector<ChainId> chains_;
  const double horizon_;
  TagRouter client_edge_;
  TagRouter server_edge_;
  std::vector<TagRouter> branches_;
  std::vector<NfInstance> nfs_;
  std::unordered_map<std::uint16_t, ChainId> by_tag_;

  Cluster cluster_;
  std::priority_queue<Event, std::vector<Event>, Later> queue_;
  std::uint64_t seq_ = 0;
  double now_ = 0.0;

  std::vector<SessionState> sessions_;
  std::vector<std::size_t> draining_;
  std::set<std::uint32_t> probe_pending_;
  std::set<ChainId> reclaimed_;
  std::map<ChainId, double> last_touch_;
  std::map<std::string, std::size_t> log_counts_;
  RunResult result_;
};

}  // namespace

RunResult run(const Scenario& scenario) {
  scenario.validate();
  return Simulator(scenario).run();
}

}  // namespace nfscale
