#include "nfscale/scenario_file.hpp"

#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "nfscale/error.hpp"

namespace nfscale {

namespace {

class Reader {
 public:
  explicit Reader(std::string source) : source_(std::move(source)) {}

  [[noreturn]] void parse_error(const YAML::Node& node, const std::string& what) const {
    throw Error(Errc::ParseError, where(node) + what);
  }

  [[noreturn]] void invalid(const YAML::Node& node, const std::string& field, const std::string& what) const {
    throw Error(Errc::ValidationError, where(node) + field + ": " + what);
  }

  std::string where(const YAML::Node& node) const {
    const auto mark = node.Mark();
    if (mark.line < 0) return source_ + ": ";
    return source_ + ":" + std::to_string(mark.line + 1) + ": ";
  }

  std::string where(int line) const { return source_ + ":" + std::to_string(line) + ": "; }

  void note(const std::string& field, const YAML::Node& node) {
    const auto mark = node.Mark();
    if (mark.line >= 0) lines_[field] = mark.line + 1;
  }

  // Line of the longest recorded field that prefixes `field`.
  int line_of(const std::string& field) const {
    int best = 0;
    std::size_t best_len = 0;
    for (const auto& [k, line] : lines_) {
      if (field.compare(0, k.size(), k) != 0) continue;
      if (field.size() > k.size() && field[k.size()] != '.' && field[k.size()] != '[') continue;
      if (k.size() >= best_len) {
        best = line;
        best_len = k.size();
      }
    }
    return best;
  }

  const std::string& source() const noexcept { return source_; }

  void map_of(const YAML::Node& node, const std::string& field, std::initializer_list<const char*> keys) {
    if (!node.IsMap()) parse_error(node, field + ": expected a mapping");
    note(field, node);
    const std::set<std::string> allowed(keys.begin(), keys.end());
    for (const auto& kv : node) {
      const auto key = kv.first.as<std::string>();
      if (!allowed.contains(key)) {
        invalid(kv.first, field.empty() ? key : field + "." + key, "unknown key");
      }
      note(field.empty() ? key : field + "." + key, kv.second);
    }
  }

  template <typename T>
  void scalar(const YAML::Node& parent, const char* key, const std::string& field, T& out) {
    const auto node = parent[key];
    if (!node) return;
    if (!node.IsScalar()) parse_error(node, field + ": expected a scalar");
    try {
      out = node.as<T>();
    } catch (const YAML::BadConversion&) {
      parse_error(node, field + ": cannot read '" + node.Scalar() + "' as " + type_name<T>());
    }
  }

  ChainId chain(const YAML::Node& node, const std::string& field) {
    if (!node.IsSequence() || node.size() != 2) parse_error(node, field + ": expected [forward, reverse]");
    std::uint16_t f = 0;
    std::uint16_t r = 0;
    try {
      f = node[0].as<std::uint16_t>();
      r = node[1].as<std::uint16_t>();
    } catch (const YAML::BadConversion&) {
      parse_error(node, field + ": tags must be integers");
    }
    try {
      return ChainId(f, r);
    } catch (const Error& e) {
      invalid(node, field, e.what());
    }
  }

  std::vector<ChainId> chains(const YAML::Node& node, const std::string& field) {
    std::vector<ChainId> out;
    if (!node) return out;
    if (!node.IsSequence()) parse_error(node, field + ": expected a list of tag pairs");
    for (std::size_t i = 0; i < node.size(); ++i) {
      const auto f = field + "[" + std::to_string(i) + "]";
      note(f, node[i]);
      out.push_back(chain(node[i], f));
    }
    return out;
  }

 private:
  template <typename T>
  static const char* type_name() {
    if constexpr (std::is_same_v<T, std::string>) return "a string";
    else if constexpr (std::is_same_v<T, bool>) return "a boolean";
    else if constexpr (std::is_floating_point_v<T>) return "a number";
    else return "a non-negative integer";
  }

  std::string source_;
  std::map<std::string, int> lines_;
};

void read_traffic(Reader& rd, const YAML::Node& n, TrafficProfile& t) {
  rd.map_of(n, "traffic",
            {"sessions", "rate", "arrivals", "start", "bytes_per_session", "request_share", "packet_size",
             "median_duration", "duration_jitter", "think", "reversed_fraction", "tuple_pool"});
  rd.scalar(n, "sessions", "traffic.sessions", t.sessions);
  rd.scalar(n, "rate", "traffic.rate", t.rate);
  std::string arrivals;
  rd.scalar(n, "arrivals", "traffic.arrivals", arrivals);
  if (arrivals == "fixed") t.arrivals = Arrivals::Fixed;
  else if (arrivals == "poisson") t.arrivals = Arrivals::Poisson;
  else if (!arrivals.empty()) rd.invalid(n["arrivals"], "traffic.arrivals", "expected fixed or poisson");
  rd.scalar(n, "start", "traffic.start", t.start_s);
  rd.scalar(n, "bytes_per_session", "traffic.bytes_per_session", t.bytes_per_session);
  rd.scalar(n, "request_share", "traffic.request_share", t.request_share);
  rd.scalar(n, "packet_size", "traffic.packet_size", t.packet_size);
  rd.scalar(n, "median_duration", "traffic.median_duration", t.median_duration_s);
  rd.scalar(n, "duration_jitter", "traffic.duration_jitter", t.duration_jitter);
  rd.scalar(n, "think", "traffic.think", t.think_s);
  rd.scalar(n, "reversed_fraction", "traffic.reversed_fraction", t.reversed_fraction);
  rd.scalar(n, "tuple_pool", "traffic.tuple_pool", t.tuple_pool);
}

void read_nf(Reader& rd, const YAML::Node& n, NfConfig& nf) {
  rd.map_of(n, "nf", {"mode", "capacity", "burst", "queue_limit"});
  std::string mode;
  rd.scalar(n, "mode", "nf.mode", mode);
  if (mode == "passthrough") nf.mode = NfMode::Passthrough;
  else if (mode == "capacity_limited") nf.mode = NfMode::CapacityLimited;
  else if (!mode.empty()) rd.invalid(n["mode"], "nf.mode", "expected passthrough or capacity_limited");
  rd.scalar(n, "capacity", "nf.capacity", nf.capacity_Bps);
  rd.scalar(n, "burst", "nf.burst", nf.burst_bytes);
  rd.scalar(n, "queue_limit", "nf.queue_limit", nf.queue_limit);
}

std::vector<Action> read_actions(Reader& rd, const YAML::Node& n) {
  std::vector<Action> out;
  if (!n) return out;
  if (!n.IsSequence()) rd.parse_error(n, "actions: expected a list");
  for (std::size_t i = 0; i < n.size(); ++i) {
    const auto field = "actions[" + std::to_string(i) + "]";
    const auto& a = n[i];
    rd.map_of(a, field, {"at", "add", "remove", "rebalance"});
    if (!a["at"]) rd.invalid(a, field + ".at", "missing");
    Action act;
    rd.scalar(a, "at", field + ".at", act.at);
    const int verbs = (a["add"] ? 1 : 0) + (a["remove"] ? 1 : 0) + (a["rebalance"] ? 1 : 0);
    if (verbs != 1) rd.invalid(a, field, "exactly one of add, remove, rebalance is required");
    if (a["add"]) {
      act.kind = ActionKind::Add;
      rd.note(field + ".chain", a["add"]);
      act.chain = rd.chain(a["add"], field + ".add");
    } else if (a["remove"]) {
      act.kind = ActionKind::Remove;
      rd.note(field + ".chain", a["remove"]);
      act.chain = rd.chain(a["remove"], field + ".remove");
    } else {
      bool yes = false;
      rd.scalar(a, "rebalance", field + ".rebalance", yes);
      if (!yes) rd.invalid(a["rebalance"], field + ".rebalance", "must be true");
      act.kind = ActionKind::Rebalance;
    }
    out.push_back(act);
  }
  return out;
}

std::vector<Interval> read_steady(Reader& rd, const YAML::Node& n) {
  std::vector<Interval> out;
  if (!n) return out;
  if (!n.IsSequence()) rd.parse_error(n, "steady: expected a list of [from, to] pairs");
  for (std::size_t i = 0; i < n.size(); ++i) {
    const auto field = "steady[" + std::to_string(i) + "]";
    const auto& p = n[i];
    if (!p.IsSequence() || p.size() != 2) rd.parse_error(p, field + ": expected [from, to]");
    Interval iv;
    try {
      iv.from = p[0].as<double>();
      iv.to = p[1].as<double>();
    } catch (const YAML::BadConversion&) {
      rd.parse_error(p, field + ": bounds must be numbers");
    }
    if (!(iv.from >= 0.0) || !(iv.to == 0.0 || iv.to > iv.from)) {
      rd.invalid(p, field, "needs 0 <= from < to (to = 0 means the horizon)");
    }
    out.push_back(iv);
  }
  return out;
}

ScenarioFile build(const YAML::Node& root, Reader& rd) {
  if (!root.IsMap()) rd.parse_error(root, "top level must be a mapping");
  rd.map_of(root, "",
            {"name", "seed", "hash", "session_timeout", "window", "chains", "standby", "traffic", "nf", "actions",
             "timing", "horizon", "steady"});

  ScenarioFile out;
  out.source = rd.source();
  auto& sc = out.scenario;
  rd.scalar(root, "name", "name", sc.name);
  rd.scalar(root, "seed", "seed", sc.seed);
  if (const auto h = root["hash"]) {
    rd.map_of(h, "hash", {"seed", "buckets", "max_chains"});
    rd.scalar(h, "seed", "hash.seed", sc.cluster.hash.seed);
    rd.scalar(h, "buckets", "hash.buckets", sc.cluster.hash.buckets);
    rd.scalar(h, "max_chains", "hash.max_chains", sc.cluster.hash.max_chains);
  }
  rd.scalar(root, "session_timeout", "session_timeout", sc.cluster.session_timeout_s);
  rd.scalar(root, "window", "window", sc.cluster.window_s);
  sc.cluster.chains = rd.chains(root["chains"], "chains");
  sc.standby = rd.chains(root["standby"], "standby");
  if (const auto t = root["traffic"]) read_traffic(rd, t, sc.traffic);
  if (const auto n = root["nf"]) read_nf(rd, n, sc.nf);
  sc.actions = read_actions(rd, root["actions"]);
  if (const auto t = root["timing"]) {
    rd.map_of(t, "timing", {"hop_latency", "stats_interval", "poll_interval", "expire_interval"});
    rd.scalar(t, "hop_latency", "hop_latency", sc.hop_latency_s);
    rd.scalar(t, "stats_interval", "stats_interval", sc.stats_interval_s);
    rd.scalar(t, "poll_interval", "poll_interval", sc.poll_interval_s);
    rd.scalar(t, "expire_interval", "expire_interval", sc.expire_interval_s);
    for (const char* k : {"hop_latency", "stats_interval", "poll_interval", "expire_interval"}) {
      if (t[k]) rd.note(k, t[k]);
    }
  }
  rd.scalar(root, "horizon", "horizon", sc.horizon_s);
  out.steady = read_steady(rd, root["steady"]);

  try {
    sc.validate();
  } catch (const Error& e) {
    if (e.code() != Errc::ScenarioInvalid) throw;
    // "ScenarioInvalid: <field>: <detail>"
    std::string msg = e.what();
    msg = msg.substr(msg.find(": ") + 2);
    const auto field = msg.substr(0, msg.find(": "));
    const int line = rd.line_of(field);
    throw Error(Errc::ValidationError, (line ? rd.where(line) : rd.source() + ": ") + msg);
  }
  return out;
}

}  // namespace

ScenarioFile parse_scenario_text(const std::string& text, const std::string& source) {
  Reader rd(source);
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw Error(Errc::ParseError, rd.where(e.mark.line + 1) + e.msg);
  }
  try {
    return build(root, rd);
  } catch (const YAML::Exception& e) {
    const auto line = e.mark.line >= 0 ? rd.where(e.mark.line + 1) : source + ": ";
    throw Error(Errc::ParseError, line + e.msg);
  }
}

ScenarioFile parse_scenario(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::ParseError, path + ": cannot open");
  std::ostringstream text;
  text << in.rdbuf();
  return parse_scenario_text(text.str(), path);
}

}  // namespace nfscale
