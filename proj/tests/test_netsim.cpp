#include <doctest.h>

#include <cmath>

#include "nfscale/netsim.hpp"

using namespace nfscale;

namespace {

const ChainId c1{2, 3};
const ChainId c2{4, 5};
const ChainId c3{6, 7};

template <typename Fn>
Errc error_of(Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return Errc::InvalidArgument;
}

Frame frame(std::uint32_t bytes = 100) {
  Frame f;
  f.src = Endpoint::parse("10.0.0.1:1024");
  f.dst = Endpoint::parse("10.1.0.2:80");
  f.bytes = bytes;
  return f;
}

Scenario small(std::vector<ChainId> chains, std::uint32_t sessions = 300) {
  Scenario sc;
  sc.cluster.chains = std::move(chains);
  sc.traffic.sessions = sessions;
  return sc;
}

}  // namespace

// ---------------------------------------------------------------- traffic

TEST_CASE("one session of 1000 B in 500 B packets") {
  SessionSpec s;
  s.client = Endpoint::parse("10.0.0.1:1024");
  s.server = Endpoint::parse("10.1.0.2:80");
  s.duration = 1.0;
  s.think = 0.02;
  s.packet_size = 500;
  s.request_bytes = 1000;
  const auto only_forward = packetize(s);
  REQUIRE(only_forward.size() == 2);
  for (const auto& p : only_forward) {
    CHECK(p.dir == Direction::Forward);
    CHECK(p.packet.bytes == 500);
  }

  s.response_bytes = 1200;
  const auto both = packetize(s);
  REQUIRE(both.size() == 5);
  CHECK(both[2].dir == Direction::Reverse);
  CHECK(both[4].packet.bytes == 200);
  CHECK(both[4].packet.timestamp == doctest::Approx(1.0));
  CHECK(both[2].packet.src == s.server);
}

TEST_CASE("desk-scale profile") {
  TrafficProfile p;
  const auto sessions = generate_sessions(p, 1);
  REQUIRE(sessions.size() == 800);
  CHECK(sessions[75].start == doctest::Approx(1.0));
  std::set<SessionKey> keys;
  std::uint64_t bytes = 0;
  for (const auto& s : sessions) {
    keys.insert(canonical_key(s.client, s.server));
    bytes += s.total_bytes();
    CHECK(s.duration >= 6.0 * 0.95);
    CHECK(s.duration <= 6.0 * 1.05);
  }
  CHECK(keys.size() == 800);
  CHECK(bytes == 800u * 75'000u);
}

TEST_CASE("traffic is deterministic per seed") {
  TrafficProfile p;
  p.sessions = 50;
  p.arrivals = Arrivals::Poisson;
  const auto a = generate_traffic(p, 7);
  const auto b = generate_traffic(p, 7);
  const auto c = generate_traffic(p, 8);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].packet.timestamp == b[i].packet.timestamp);
    CHECK(a[i].packet.src == b[i].packet.src);
    CHECK(a[i].packet.bytes == b[i].packet.bytes);
  }
  CHECK(a.front().packet.src != c.front().packet.src);
  CHECK(std::is_sorted(a.begin(), a.end(), [](const auto& x, const auto& y) {
    return x.packet.timestamp < y.packet.timestamp;
  }));
}

TEST_CASE("poisson arrivals follow the rate") {
  TrafficProfile p;
  p.sessions = 20000;
  p.rate = 50.0;
  p.arrivals = Arrivals::Poisson;
  const auto s = generate_sessions(p, 3);
  CHECK(s.back().start / (s.size() - 1) == doctest::Approx(1.0 / 50.0).epsilon(0.03));
}

TEST_CASE("tuple pool reuses client ports") {
  TrafficProfile p;
  p.sessions = 100;
  p.tuple_pool = 10;
  std::set<SessionKey> keys;
  for (const auto& s : generate_sessions(p, 1)) keys.insert(canonical_key(s.client, s.server));
  CHECK(keys.size() == 10);
}

TEST_CASE("invalid profiles") {
  TrafficProfile p;
  p.rate = 0;
  CHECK(error_of([&] { p.validate(); }) == Errc::InvalidArgument);
  p = {};
  p.request_share = 0;
  CHECK(error_of([&] { p.validate(); }) == Errc::InvalidArgument);
}

// ---------------------------------------------------------------- tags and routing

TEST_CASE("push then pop restores the frame") {
  const auto f = frame();
  const auto back = pop_tag(push_tag(f, 6));
  CHECK_FALSE(back.tagged());
  CHECK(back.bytes == f.bytes);
  CHECK(back.key() == f.key());
}

TEST_CASE("stack discipline") {
  const auto twice = push_tag(push_tag(frame(), 6), 9);
  CHECK(twice.outer_tag() == 9);
  const auto once = pop_tag(twice);
  CHECK(once.outer_tag() == 6);
  CHECK(once.depth == 1);
  CHECK(error_of([] { pop_tag(frame()); }) == Errc::EmptyTagStack);
  auto full = frame();
  for (std::size_t i = 0; i < kMaxTagDepth; ++i) full = push_tag(full, 2);
  CHECK(error_of([&] { push_tag(full, 2); }) == Errc::InvalidArgument);
}

TEST_CASE("client edge rules") {
  const auto r = edge_switch_rules({c1, c2, c3}, Edge::Client);
  CHECK(route(r, 1, frame()).port == 3);
  CHECK(route(r, 2, frame()).port == 3);
  CHECK(route(r, 4, push_tag(frame(), 2)).port == 5);
  CHECK(route(r, 4, push_tag(frame(), 4)).port == 6);
  CHECK(route(r, 4, push_tag(frame(), 6)).port == 7);
  for (std::uint16_t tag : {3, 5, 7}) {
    const auto out = route(r, 6, push_tag(frame(), tag));
    CHECK(out.port == 3);
    CHECK(out.frame.outer_tag() == tag);
  }
  CHECK(route(r, 4, frame()).port == 1);
  CHECK(error_of([&] { route(r, 4, push_tag(frame(), 40)); }) == Errc::NoRoute);
}

TEST_CASE("server edge mirrors the client edge") {
  const auto r = edge_switch_rules({c1, c2}, Edge::Server);
  CHECK(route(r, 1, frame()).port == 3);
  CHECK(route(r, 4, push_tag(frame(), 5)).port == 6);
  CHECK(route(r, 5, push_tag(frame(), 2)).port == 3);
  CHECK(route(r, 4, push_tag(frame(), 2)).port == 3);
  CHECK(error_of([&] { route(r, 4, push_tag(frame(), 40)); }) == Errc::NoRoute);
}

TEST_CASE("branch switch hides tags from the NF") {
  const auto r = branch_switch_rules(c3);
  const auto to_nf = route(r, 1, push_tag(frame(), 6));
  CHECK(to_nf.port == 2);
  CHECK_FALSE(to_nf.frame.tagged());
  const auto past_nf = route(r, 3, to_nf.frame);
  CHECK(past_nf.port == 4);
  CHECK(past_nf.frame.outer_tag() == 6);

  const auto back_to_nf = route(r, 4, push_tag(frame(), 7));
  CHECK(back_to_nf.port == 3);
  CHECK_FALSE(back_to_nf.frame.tagged());
  const auto returning = route(r, 2, back_to_nf.frame);
  CHECK(returning.port == 1);
  CHECK(returning.frame.outer_tag() == 7);

  CHECK(error_of([&] { route(r, 1, push_tag(frame(), 4)); }) == Errc::NoRoute);
}

TEST_CASE("tags the frame already carried reach the NF unchanged") {
  const auto r = branch_switch_rules(c3);
  const auto inner = push_tag(frame(), 100);
  const auto to_nf = route(r, 1, push_tag(inner, 6));
  CHECK(to_nf.frame.outer_tag() == 100);
}

// ---------------------------------------------------------------- NF

TEST_CASE("passthrough adds no delay") {
  NfInstance nf(c1, NfConfig{});
  CHECK(nf.process(frame(), 3.25) == 3.25);
}

TEST_CASE("token bucket hand simulation") {
  NfConfig cfg;
  cfg.mode = NfMode::CapacityLimited;
  cfg.capacity_Bps = 100;
  cfg.burst_bytes = 100;
  NfInstance nf(c1, cfg);
  double last = 0;
  for (int i = 0; i < 10; ++i) {
    last = nf.process(frame(100), 0.0);
    CHECK(last == doctest::Approx(i));
  }
  CHECK(last >= 9.0);
  CHECK(last <= 10.0);
  CHECK(nf.queued(0.0) == 9);  // the first one left at once
  CHECK(nf.queued(9.0) == 0);
}

TEST_CASE("load below capacity is not queued") {
  NfConfig cfg;
  cfg.mode = NfMode::CapacityLimited;
  cfg.capacity_Bps = 1000;
  cfg.burst_bytes = 100;
  NfInstance nf(c1, cfg);
  for (int i = 0; i < 50; ++i) {
    const double t = 0.2 * i;
    CHECK(nf.process(frame(100), t) == doctest::Approx(t));
  }
}

TEST_CASE("sustained rate never exceeds capacity") {
  NfConfig cfg;
  cfg.mode = NfMode::CapacityLimited;
  cfg.capacity_Bps = 1000;
  cfg.burst_bytes = 1500;
  cfg.queue_limit = 100000;
  NfInstance nf(c1, cfg);
  std::map<int, double> per_second;
  for (int i = 0; i < 5000; ++i) per_second[static_cast<int>(nf.process(frame(100), i * 0.01))] += 100;
  for (const auto& [s, bytes] : per_second) CHECK(bytes <= 1000 + 1500);
}

TEST_CASE("queue overflow and tagged frames") {
  NfConfig cfg;
  cfg.mode = NfMode::CapacityLimited;
  cfg.capacity_Bps = 10;
  cfg.queue_limit = 2;
  NfInstance nf(c1, cfg);
  nf.process(frame(100), 0.0);
  nf.process(frame(100), 0.0);
  CHECK(error_of([&] { nf.process(frame(100), 0.0); }) == Errc::QueueOverflow);
  CHECK(error_of([&] { nf.process(push_tag(frame(), 2), 50.0); }) == Errc::InvalidArgument);
}

// ---------------------------------------------------------------- series

TEST_CASE("series buckets and csv") {
  ThroughputSeries s({c1, c2}, 2);
  s.add(c1, 0.5, 10);
  s.add(c2, 1.99, 30);
  s.add(c1, 2.0, 5);
  CHECK(s.seconds() == 3);
  CHECK(s.total(1) == 30);
  CHECK(s.share(c1, 0, 3) == doctest::Approx(15.0 / 45.0));
  CHECK(s.to_csv() == "time_s,chain_fwd_tag,bytes\n0,2,10\n0,4,0\n1,2,0\n1,4,30\n2,2,5\n2,4,0\n");
  CHECK(error_of([&] { s.add(c3, 0, 1); }) == Errc::UnknownChain);
}

TEST_CASE("convergence measurement") {
  ThroughputSeries s({c1, c2}, 12);
  for (std::size_t t = 0; t < 12; ++t) {
    s.add(c1, t, 100);
    s.add(c2, t, t < 6 ? 10 * t : 100);
  }
  SUBCASE("already balanced with no event") {
    ThroughputSeries flat({c1, c2}, 5);
    for (std::size_t t = 0; t < 5; ++t) {
      flat.add(c1, t, 50);
      flat.add(c2, t, 50);
    }
    CHECK(measure_convergence(flat, 0.0, {c1, c2}) == 0.0);
  }
  SUBCASE("climb to parity") {
    // second 5: 100 vs 50 is out of band; from 6 on the split is even.
    CHECK(measure_convergence(s, 2.0, {c1, c2}) == 4.0);
    CHECK(measure_convergence(s, 2.5, {c1, c2}) == 3.5);
  }
  SUBCASE("band edges") {
    ConvergenceOptions wide;
    wide.band = 0.4;  // share in [0.3, 0.7]; 100/(100+50) = 0.667 qualifies
    CHECK(measure_convergence(s, 0.0, {c1, c2}, wide) == 5.0);
  }
  SUBCASE("never") {
    ConvergenceOptions o;
    o.horizon_s = 7;
    CHECK(error_of([&] { measure_convergence(s, 0.0, {c1, c2}, o); }) == Errc::NeverConverged);
  }
}

TEST_CASE("drain measurement") {
  ThroughputSeries s({c1, c2}, 10);
  for (std::size_t t = 0; t < 10; ++t) s.add(c2, t, t < 7 ? 100 : 0);
  CHECK(measure_drain(s, 3.0, c2) == 4.0);
  CHECK(measure_drain(s, 3.0, c1) == 0.0);
  CHECK(error_of([&] { measure_drain(s, 3.0, c2, 6.0); }) == Errc::NeverConverged);
}

// ---------------------------------------------------------------- runs

TEST_CASE("scenario validation") {
  auto sc = small({c1, c2});
  SUBCASE("undeclared chain in an action") {
    sc.actions = {{5.0, ActionKind::Add, c3}};
    CHECK(error_of([&] { sc.validate(); }) == Errc::ScenarioInvalid);
  }
  SUBCASE("overlapping standby tags") {
    sc.standby = {ChainId{5, 9}};
    CHECK(error_of([&] { sc.validate(); }) == Errc::ScenarioInvalid);
  }
  SUBCASE("unsorted actions") {
    sc.actions = {{5.0, ActionKind::Rebalance, {}}, {4.0, ActionKind::Rebalance, {}}};
    CHECK(error_of([&] { sc.validate(); }) == Errc::ScenarioInvalid);
  }
  SUBCASE("removing the last chain") {
    sc.actions = {{1.0, ActionKind::Remove, c1}, {2.0, ActionKind::Remove, c2}};
    CHECK(error_of([&] { sc.validate(); }) == Errc::ScenarioInvalid);
  }
  SUBCASE("field named in the message") {
    sc.actions = {{5.0, ActionKind::Remove, c3}};
    try {
      sc.validate();
      FAIL("expected ScenarioInvalid");
    } catch (const Error& e) {
      CHECK(std::string(e.what()).find("actions[0].chain") != std::string::npos);
    }
  }
}

TEST_CASE("static two-chain run conserves bytes and keeps sessions whole") {
  const auto r = run(small({c1, c2}));
  const auto& k = r.counters;
  CHECK(k.anomalies == 0);
  CHECK(k.injected_bytes == 300u * 75'000u);
  CHECK(k.injected_bytes == k.delivered_bytes + k.dropped_bytes + k.in_flight_bytes);
  CHECK(k.in_flight_bytes == 0);
  for (const auto& s : r.sessions) {
    CHECK(s.single_chain);
    CHECK(s.agreed);
    CHECK(s.first_chain == s.master_choice);
  }
  // Both directions cross the NF, so the series holds every delivered byte.
  std::uint64_t series_total = 0;
  for (std::size_t t = 0; t < r.series.seconds(); ++t) series_total += r.series.total(t);
  CHECK(series_total == k.delivered_bytes);
  const auto shares = r.series.shares(0, r.series.seconds());
  CHECK(shares.at(c1) + shares.at(c2) == doctest::Approx(1.0));
  CHECK(shares.at(c1) == doctest::Approx(0.5).epsilon(0.2));
}

TEST_CASE("same seed gives the same series and log") {
  auto sc = small({c1, c2}, 200);
  sc.standby = {c3};
  sc.actions = {{2.0, ActionKind::Add, c3}, {3.0, ActionKind::Remove, c1}};
  const auto a = run(sc);
  const auto b = run(sc);
  CHECK(a.series.to_csv() == b.series.to_csv());
  REQUIRE(a.log.size() == b.log.size());
  for (std::size_t i = 0; i < a.log.size(); ++i) CHECK(a.log[i].data == b.log[i].data);
  sc.seed = 2;
  CHECK(run(sc).series.to_csv() != a.series.to_csv());
}

TEST_CASE("warm-up moves new sessions to the added chain") {
  auto sc = small({c1}, 1200);
  sc.standby = {c2};
  sc.actions = {{8.0, ActionKind::Add, c2}};
  const auto r = run(sc);
  CHECK(r.counters.anomalies == 0);
  REQUIRE(r.commits.size() == 1);
  CHECK(r.commits[0].ok);
  CHECK(r.buckets_always_equal);
  CHECK(r.series.at(c2, 7) == 0);
  CHECK(r.series.at(c2, 9) > 0);
  CHECK(measure_convergence(r.series, 8.0, {c1, c2}) <= 7.0);
}

TEST_CASE("cool-down drains and reclaims the chain") {
  auto sc = small({c1, c2}, 1200);
  sc.actions = {{8.0, ActionKind::Remove, c2}};
  const auto r = run(sc);
  CHECK(r.counters.anomalies == 0);
  REQUIRE(r.drains.size() == 1);
  const auto& d = r.drains[0];
  CHECK(d.last_packet > 8.0);
  CHECK(d.inactive_at == doctest::Approx(d.last_packet + sc.cluster.session_timeout_s));
  CHECK(d.reclaimed_at >= d.inactive_at);
  CHECK(d.reclaimed_at < d.inactive_at + sc.poll_interval_s + 1e-9);
  CHECK(measure_drain(r.series, 8.0, c2) <= 7.0);
}

TEST_CASE("capacity-limited NFs shape throughput") {
  auto sc = small({c1}, 200);
  sc.nf.mode = NfMode::CapacityLimited;
  sc.nf.capacity_Bps = 1'000'000;
  sc.nf.burst_bytes = 3000;
  sc.nf.queue_limit = 1'000'000;
  sc.horizon_s = 60;
  const auto r = run(sc);
  CHECK(r.counters.anomalies == 0);
  for (std::size_t t = 0; t < r.series.seconds(); ++t) CHECK(r.series.total(t) <= 1'000'000 + 3000);
  CHECK(r.counters.delivered_bytes == r.counters.injected_bytes);
}

TEST_CASE("queue overflow drops are logged, not anomalies") {
  auto sc = small({c1}, 100);
  sc.nf.mode = NfMode::CapacityLimited;
  sc.nf.capacity_Bps = 50'000;
  sc.nf.queue_limit = 20;
  const auto r = run(sc);
  CHECK(r.counters.overflow > 0);
  CHECK(r.counters.dropped_bytes > 0);
  CHECK(r.counters.anomalies == 0);
  CHECK(r.counters.injected_bytes ==
        r.counters.delivered_bytes + r.counters.dropped_bytes + r.counters.in_flight_bytes);
}

TEST_CASE("reversed sessions end in agreement") {
  auto sc = small({c1, c2}, 2000);
  sc.traffic.reversed_fraction = 0.2;
  sc.standby = {c3};
  sc.actions = {{5.0, ActionKind::Add, c3}, {10.0, ActionKind::Rebalance, {}}, {15.0, ActionKind::Remove, c1}};
  const auto r = run(sc);
  std::size_t reversed = 0;
  for (const auto& s : r.sessions) {
    reversed += s.reversed;
    CHECK(s.agreed);
    if (!s.reversed) CHECK(s.single_chain);
  }
  CHECK(reversed > 300);
  CHECK(r.counters.anomalies == 0);
}
