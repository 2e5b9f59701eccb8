#include "nfscale/report.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "nfscale/error.hpp"

namespace nfscale {

using nlohmann::ordered_json;

namespace {

ordered_json opt(const std::optional<double>& v) { return v ? ordered_json(*v) : ordered_json(); }

ordered_json chain_list(const std::vector<ChainId>& chains) {
  auto out = ordered_json::array();
  for (const auto& c : chains) out.push_back(c.to_string());
  return out;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::InvalidArgument, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(Errc::InvalidArgument, "short write on " + path.string());
}

IntervalShares shares_over(const ThroughputSeries& series, Interval iv) {
  IntervalShares out;
  out.interval = iv;
  const auto from = static_cast<std::size_t>(std::floor(iv.from));
  const auto to = iv.to > 0.0 ? static_cast<std::size_t>(std::ceil(iv.to)) : series.seconds();
  out.shares = series.shares(from, to);
  for (std::size_t t = from; t < std::min(to, series.seconds()); ++t) out.bytes += series.total(t);
  return out;
}

EventReport measure_event(const RunResult& r, const CommitOutcome& c, const RunOptions& o) {
  EventReport ev;
  ev.at = c.at;
  ev.kind = c.kind;
  ev.chain = c.chain;
  ev.generation = c.generation;
  ev.ok = c.ok;
  ev.live_after = c.live_after;
  if (!c.ok) {
    ev.notes.push_back("commit failed");
    return ev;
  }
  const ConvergenceOptions conv{o.band, o.dwell_s, 0.0};
  try {
    ev.convergence_s = measure_convergence(r.series, c.at, c.live_after, conv);
  } catch (const Error& e) {
    ev.notes.push_back(e.what());
  }
  if (c.kind == ActionKind::Add) {
    for (const auto& s : r.sessions) {
      if (!s.master_choice || s.first_mapped < c.at || s.first_mapped >= c.at + o.split_window_s) continue;
      ++ev.new_sessions;
      if (*s.master_choice == *c.chain) ++ev.new_on_chain;
    }
  }
  if (c.kind == ActionKind::Remove) {
    try {
      ev.drain_s = measure_drain(r.series, c.at, *c.chain);
    } catch (const Error& e) {
      ev.notes.push_back(e.what());
    }
    for (const auto& d : r.drains) {
      if (d.chain != *c.chain || d.removed_at != c.at) continue;
      if (d.inactive_at >= 0.0) {
        ev.idle_after_last_s = d.inactive_at - (d.last_packet >= 0.0 ? d.last_packet : d.removed_at);
      }
      if (d.reclaimed_at >= 0.0) ev.reclaimed_at = d.reclaimed_at;
      else ev.notes.push_back("path never reclaimed");
    }
  }
  return ev;
}

std::string stem_of(const RunReport& r) { return r.scenario + "-s" + std::to_string(r.seed); }

}  // namespace

bool RunReport::clean() const noexcept {
  return counters.anomalies == 0 && conserved && buckets_always_equal && single_chain_sessions == sessions &&
         agreed_sessions == sessions;
}

ordered_json RunReport::to_json() const {
  ordered_json j;
  j["scenario"] = scenario;
  j["seed"] = seed;
  j["horizon_s"] = horizon_s;
  j["clean"] = clean();
  auto steady_j = ordered_json::array();
  for (const auto& s : steady) {
    ordered_json e;
    e["from"] = s.interval.from;
    e["to"] = s.interval.to > 0.0 ? ordered_json(s.interval.to) : ordered_json(horizon_s);
    e["bytes"] = s.bytes;
    ordered_json shares = ordered_json::object();
    for (const auto& [c, v] : s.shares) shares[c.to_string()] = v;
    e["shares"] = shares;
    steady_j.push_back(e);
  }
  j["steady"] = steady_j;
  auto events_j = ordered_json::array();
  for (const auto& ev : events) {
    ordered_json e;
    e["at"] = ev.at;
    e["action"] = action_name(ev.kind);
    e["chain"] = ev.chain ? ordered_json(ev.chain->to_string()) : ordered_json();
    e["generation"] = ev.generation;
    e["ok"] = ev.ok;
    e["live_after"] = chain_list(ev.live_after);
    e["convergence_s"] = opt(ev.convergence_s);
    if (ev.kind == ActionKind::Add) {
      e["new_sessions"] = ev.new_sessions;
      e["new_on_chain"] = ev.new_on_chain;
    }
    if (ev.kind == ActionKind::Remove) {
      e["drain_s"] = opt(ev.drain_s);
      e["idle_after_last_s"] = opt(ev.idle_after_last_s);
      e["reclaimed_at"] = opt(ev.reclaimed_at);
    }
    if (!ev.notes.empty()) e["notes"] = ev.notes;
    events_j.push_back(e);
  }
  j["events"] = events_j;
  j["conservation"] = {{"injected_bytes", counters.injected_bytes},
                       {"delivered_bytes", counters.delivered_bytes},
                       {"dropped_bytes", counters.dropped_bytes},
                       {"in_flight_bytes", counters.in_flight_bytes},
                       {"holds", conserved}};
  j["packets"] = counters.packets;
  j["no_route"] = counters.no_route;
  j["overflow"] = counters.overflow;
  j["corrected"] = counters.corrected;
  j["diverged"] = counters.diverged;
  j["anomalies"] = counters.anomalies;
  j["buckets_always_equal"] = buckets_always_equal;
  j["sessions"] = {{"total", sessions},
                   {"single_chain", single_chain_sessions},
                   {"agreed", agreed_sessions},
                   {"reversed", reversed_sessions}};
  j["files"] = {{"series", csv_path.filename().string()},
                {"report", report_path.filename().string()},
                {"events", events_path.filename().string()}};
  return j;
}

RunReport evaluate(const ScenarioFile& file, const RunOptions& options, RunResult* keep) {
  const auto& sc = file.scenario;
  RunResult r;
  try {
    r = run(sc);
  } catch (const Error& e) {
    throw Error(e.code(), file.source + ": " + e.what());
  }

  RunReport rep;
  rep.scenario = sc.name;
  rep.seed = sc.seed;
  rep.horizon_s = sc.effective_horizon();
  auto steady = file.steady;
  if (steady.empty()) steady.push_back({0.0, 0.0});
  for (const auto& iv : steady) rep.steady.push_back(shares_over(r.series, iv));
  for (const auto& c : r.commits) rep.events.push_back(measure_event(r, c, options));
  rep.counters = r.counters;
  rep.conserved = r.counters.injected_bytes ==
                  r.counters.delivered_bytes + r.counters.dropped_bytes + r.counters.in_flight_bytes;
  rep.buckets_always_equal = r.buckets_always_equal;
  rep.sessions = static_cast<std::uint32_t>(r.sessions.size());
  for (const auto& s : r.sessions) {
    rep.single_chain_sessions += s.single_chain ? 1 : 0;
    rep.agreed_sessions += s.agreed ? 1 : 0;
    rep.reversed_sessions += s.reversed ? 1 : 0;
  }
  if (keep) *keep = std::move(r);
  return rep;
}

RunReport run_scenario(const ScenarioFile& file, const std::filesystem::path& out_dir, const RunOptions& options) {
  RunResult r;
  auto rep = evaluate(file, options, &r);
  std::filesystem::create_directories(out_dir);
  const auto stem = stem_of(rep);
  rep.csv_path = out_dir / (stem + ".csv");
  rep.report_path = out_dir / (stem + ".report.json");
  rep.events_path = out_dir / (stem + ".events.jsonl");

  write_file(rep.csv_path, r.series.to_csv());
  std::string events;
  for (const auto& rec : r.log) {
    ordered_json line;
    line["t"] = rec.time;
    line["kind"] = rec.kind;
    for (const auto& [k, v] : rec.data.items()) line[k] = v;
    events += line.dump();
    events += '\n';
  }
  write_file(rep.events_path, events);
  write_file(rep.report_path, rep.to_json().dump(2) + "\n");
  return rep;
}

ScenarioFile bundled_scenario(const std::string& name) {
  for (const auto& e : bundled_corpus()) {
    if (e.name == name) return parse_scenario_text(e.text, "scenarios/" + e.name + ".yaml");
  }
  throw Error(Errc::InvalidArgument, "no bundled scenario named " + name);
}

bool SuiteReport::passed() const noexcept {
  return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
}

namespace {

struct Stats {
  double mean = 0.0;
  double sd = 0.0;
  double min = 0.0;
  double max = 0.0;
  std::size_t n = 0;
};

Stats stats(const std::vector<double>& v) {
  Stats s;
  s.n = v.size();
  if (v.empty()) return s;
  s.mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  double sq = 0.0;
  for (double x : v) sq += (x - s.mean) * (x - s.mean);
  s.sd = v.size() > 1 ? std::sqrt(sq / static_cast<double>(v.size() - 1)) : 0.0;
  s.min = *std::min_element(v.begin(), v.end());
  s.max = *std::max_element(v.begin(), v.end());
  return s;
}

ordered_json to_json(const Stats& s) {
  return {{"mean", s.mean}, {"sd", s.sd}, {"min", s.min}, {"max", s.max}, {"n", s.n}};
}

std::string fmt(double v, int digits = 3) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

// Mean share of each chain in interval `k`, over the runs.
std::map<ChainId, Stats> interval_stats(const std::vector<const RunReport*>& runs, std::size_t k) {
  std::map<ChainId, std::vector<double>> per;
  for (const auto* r : runs) {
    if (k >= r->steady.size()) continue;
    for (const auto& [c, v] : r->steady[k].shares) per[c].push_back(v);
  }
  std::map<ChainId, Stats> out;
  for (const auto& [c, v] : per) out[c] = stats(v);
  return out;
}

// Chains that carry traffic in the interval; the others are standby or drained.
std::vector<ChainId> carriers(const std::map<ChainId, Stats>& s) {
  std::vector<ChainId> out;
  for (const auto& [c, st] : s) {
    if (st.mean > 0.01) out.push_back(c);
  }
  return out;
}

void scenario_checks(const std::string& name, const std::vector<const RunReport*>& runs, const Scenario& sc,
                     std::vector<Check>& checks) {
  const double limit = sc.traffic.median_duration_s + 1.0;
  const double rho = sc.cluster.session_timeout_s;

  auto balanced = [&](std::size_t k, const std::string& label) {
    const auto s = interval_stats(runs, k);
    const auto live = carriers(s);
    Check c{name + ": " + label + " shares even within 2 pp", !live.empty(), ""};
    for (const auto& id : live) {
      const double fair = 1.0 / static_cast<double>(live.size());
      const double dev = std::abs(s.at(id).mean - fair);
      c.pass = c.pass && dev <= 0.02;
      c.detail += id.to_string() + "=" + fmt(s.at(id).mean, 4) + " ";
    }
    checks.push_back(c);
  };

  if (sc.actions.empty()) {
    balanced(0, "steady");
    return;
  }
  balanced(runs.front()->steady.size() - 1, "final interval");
  // The acceptance bounds describe isolated events; scripts with several
  // events only have to show each one.
  const bool single = sc.actions.size() == 1;

  const auto n_events = runs.front()->events.size();
  for (std::size_t k = 0; k < n_events; ++k) {
    const auto kind = runs.front()->events[k].kind;
    const auto label = name + ": event " + std::to_string(k + 1) + " (" + std::string(action_name(kind)) + ")";
    if (kind == ActionKind::Add) {
      Check conv{label + (single ? " converges within " + fmt(limit, 0) + " s" : " converges") + " on every seed",
                 true, ""};
      std::uint32_t fresh = 0;
      std::uint32_t on_new = 0;
      std::size_t live_before = 0;
      for (const auto* r : runs) {
        const auto& ev = r->events[k];
        const bool ok = ev.convergence_s && (!single || *ev.convergence_s <= limit);
        conv.pass = conv.pass && ok;
        conv.detail += ev.convergence_s ? fmt(*ev.convergence_s, 0) + " " : "never ";
        fresh += ev.new_sessions;
        on_new += ev.new_on_chain;
        live_before = ev.live_after.size() - 1;
      }
      checks.push_back(conv);
      const double want = 1.0 / static_cast<double>(live_before + 1);
      const double got = fresh ? static_cast<double>(on_new) / fresh : 0.0;
      checks.push_back({label + " new-session split 1/" + std::to_string(live_before + 1) + " +- 0.05",
                        fresh > 0 && std::abs(got - want) <= 0.05,
                        fmt(got, 4) + " of " + std::to_string(fresh) + " sessions"});
    } else if (kind == ActionKind::Remove) {
      Check drain{label + " drains within " + fmt(limit, 0) + " s on every seed", true, ""};
      Check idle{label + " path idle within rho of its last packet", true, ""};
      for (const auto* r : runs) {
        const auto& ev = r->events[k];
        drain.pass = drain.pass && ev.drain_s && *ev.drain_s <= limit;
        drain.detail += ev.drain_s ? fmt(*ev.drain_s, 0) + " " : "never ";
        idle.pass = idle.pass && ev.idle_after_last_s && *ev.idle_after_last_s <= rho + 1e-9 && ev.reclaimed_at;
        idle.detail += ev.idle_after_last_s ? fmt(*ev.idle_after_last_s, 2) + " " : "never ";
      }
      checks.push_back(drain);
      checks.push_back(idle);
    }
  }
}

}  // namespace

SuiteReport replicate_suite(const std::filesystem::path& out_dir, const SuiteOptions& options) {
  std::vector<ScenarioFile> files;
  for (const auto& e : bundled_corpus()) {
    if (!options.only.empty() && std::find(options.only.begin(), options.only.end(), e.name) == options.only.end()) {
      continue;
    }
    files.push_back(bundled_scenario(e.name));
  }

  struct Job {
    ScenarioFile file;
    RunReport report;
    std::string error;
  };
  std::vector<Job> jobs;
  for (const auto& f : files) {
    for (auto seed : options.seeds) {
      Job j{f, {}, {}};
      j.file.scenario.seed = seed;
      if (options.horizon_s) j.file.scenario.horizon_s = *options.horizon_s;
      jobs.push_back(std::move(j));
    }
  }

  std::filesystem::create_directories(out_dir);
  auto exec = [&](Job& j) {
    try {
      j.report = run_scenario(j.file, out_dir, options.run);
    } catch (const std::exception& e) {
      j.error = e.what();
    }
  };
  const auto n = static_cast<std::int64_t>(jobs.size());
  if (options.parallel) {
#pragma omp parallel for schedule(dynamic)
    for (std::int64_t i = 0; i < n; ++i) exec(jobs[static_cast<std::size_t>(i)]);
  } else {
    for (std::int64_t i = 0; i < n; ++i) exec(jobs[static_cast<std::size_t>(i)]);
  }

  SuiteReport suite;
  ordered_json scen = ordered_json::array();
  for (std::size_t f = 0; f < files.size(); ++f) {
    const auto& name = files[f].scenario.name;
    std::vector<const RunReport*> runs;
    std::vector<std::string> errors;
    for (std::size_t s = 0; s < options.seeds.size(); ++s) {
      const auto& j = jobs[f * options.seeds.size() + s];
      if (j.error.empty()) runs.push_back(&j.report);
      else errors.push_back(j.error);
      suite.runs.push_back(j.report);
    }

    ordered_json sj;
    sj["name"] = name;
    sj["seeds"] = options.seeds;
    if (!errors.empty()) {
      sj["errors"] = errors;
      suite.checks.push_back({name + ": all seeds ran", false, errors.front()});
      scen.push_back(sj);
      continue;
    }
    const bool clean = std::all_of(runs.begin(), runs.end(), [](const RunReport* r) { return r->clean(); });
    std::uint64_t anomalies = 0;
    for (const auto* r : runs) anomalies += r->counters.anomalies;
    suite.checks.push_back({name + ": no anomalies or invariant violations", clean,
                            std::to_string(anomalies) + " anomalies"});

    auto intervals = ordered_json::array();
    for (std::size_t k = 0; k < runs.front()->steady.size(); ++k) {
      ordered_json ij;
      ij["from"] = runs.front()->steady[k].interval.from;
      ij["to"] = runs.front()->steady[k].interval.to > 0.0 ? runs.front()->steady[k].interval.to
                                                          : runs.front()->horizon_s;
      ordered_json shares = ordered_json::object();
      for (const auto& [c, st] : interval_stats(runs, k)) shares[c.to_string()] = to_json(st);
      ij["shares"] = shares;
      intervals.push_back(ij);
    }
    sj["steady"] = intervals;

    auto events = ordered_json::array();
    for (std::size_t k = 0; k < runs.front()->events.size(); ++k) {
      std::vector<double> conv;
      std::vector<double> drain;
      for (const auto* r : runs) {
        if (r->events[k].convergence_s) conv.push_back(*r->events[k].convergence_s);
        if (r->events[k].drain_s) drain.push_back(*r->events[k].drain_s);
      }
      ordered_json ej;
      ej["at"] = runs.front()->events[k].at;
      ej["action"] = action_name(runs.front()->events[k].kind);
      ej["convergence_s"] = to_json(stats(conv));
      if (runs.front()->events[k].kind == ActionKind::Remove) ej["drain_s"] = to_json(stats(drain));
      events.push_back(ej);
    }
    sj["events"] = events;
    scen.push_back(sj);
    scenario_checks(name, runs, files[f].scenario, suite.checks);
  }

  const auto add_add = std::find_if(files.begin(), files.end(),
                                    [](const ScenarioFile& f) { return f.scenario.name == "combined-add-add"; });
  const auto rem_rem = std::find_if(files.begin(), files.end(),
                                    [](const ScenarioFile& f) { return f.scenario.name == "combined-remove-remove"; });
  if (add_add != files.end() && rem_rem != files.end()) {
    auto counts = [&](const ScenarioFile& f) {
      const auto idx = static_cast<std::size_t>(&f - files.data());
      std::vector<const RunReport*> runs;
      for (std::size_t s = 0; s < options.seeds.size(); ++s) runs.push_back(&jobs[idx * options.seeds.size() + s].report);
      std::vector<std::size_t> out;
      for (std::size_t k = 0; k < runs.front()->steady.size(); ++k) out.push_back(carriers(interval_stats(runs, k)).size());
      return out;
    };
    const auto up = counts(*add_add);
    auto down = counts(*rem_rem);
    std::reverse(down.begin(), down.end());
    std::string detail;
    for (auto c : up) detail += std::to_string(c) + " ";
    detail += "vs reversed ";
    for (auto c : down) detail += std::to_string(c) + " ";
    suite.checks.push_back({"combined cool-down mirrors combined warm-up", up == down && !up.empty(), detail});
  }

  auto checks = ordered_json::array();
  for (const auto& c : suite.checks) checks.push_back({{"check", c.name}, {"pass", c.pass}, {"detail", c.detail}});
  suite.summary["band"] = options.run.band;
  suite.summary["scenarios"] = scen;
  suite.summary["checks"] = checks;
  suite.summary["passed"] = suite.passed();
  write_file(out_dir / "summary.json", suite.summary.dump(2) + "\n");
  return suite;
}

}  // namespace nfscale
