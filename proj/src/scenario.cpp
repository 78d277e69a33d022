#include "resest/scenario.hpp"

#include <fstream>
#include <initializer_list>
#include <set>
#include <string>

namespace resest {

using nlohmann::json;

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void require_object(const json& j, const std::string& where) {
  if (!j.is_object()) throw ParseError(where + " must be an object");
}

void allow_keys(const json& j, const std::string& where, std::initializer_list<const char*> keys) {
  require_object(j, where);
  std::set<std::string> allowed(keys.begin(), keys.end());
  for (const auto& [k, v] : j.items()) {
    if (!allowed.contains(k)) throw ParseError("unknown key '" + k + "' in " + where);
  }
}

const json& need(const json& j, const char* key, const std::string& where) {
  const auto it = j.find(key);
  if (it == j.end()) throw ParseError(where + " is missing '" + key + "'");
  return *it;
}

double number(const json& j, const std::string& where) {
  if (!j.is_number()) throw ParseError(where + " must be a number");
  return j.get<double>();
}

std::int64_t integer(const json& j, const std::string& where) {
  if (!j.is_number_integer()) throw ParseError(where + " must be an integer");
  return j.get<std::int64_t>();
}

std::string text(const json& j, const std::string& where) {
  if (!j.is_string()) throw ParseError(where + " must be a string");
  return j.get<std::string>();
}

bool boolean(const json& j, const std::string& where) {
  if (!j.is_boolean()) throw ParseError(where + " must be a boolean");
  return j.get<bool>();
}

// Rows of numbers; an empty list is a matrix with no rows and `cols` columns.
Eigen::MatrixXd matrix(const json& j, const std::string& where, Eigen::Index cols = -1) {
  if (!j.is_array()) throw ParseError(where + " must be a list of rows");
  if (j.empty()) return Eigen::MatrixXd(0, std::max<Eigen::Index>(cols, 0));
  const auto rows = static_cast<Eigen::Index>(j.size());
  if (!j[0].is_array()) throw ParseError(where + " must be a list of rows");
  const auto c = static_cast<Eigen::Index>(j[0].size());
  Eigen::MatrixXd m(rows, c);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const json& row = j[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != c) {
      throw ParseError(where + " has ragged rows");
    }
    for (Eigen::Index k = 0; k < c; ++k) {
      m(r, k) = number(row[static_cast<std::size_t>(k)], where);
    }
  }
  return m;
}

json matrix_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

AdversaryStrategy strategy_from_json(const json& j, const std::string& where) {
  require_object(j, where);
  const std::string type = text(need(j, "type", where), where + ".type");
  if (type == "silent") {
    allow_keys(j, where, {"type"});
    return Silent{};
  }
  if (type == "constant_spoof") {
    allow_keys(j, where, {"type", "initial"});
    ConstantSpoof s;
    if (j.contains("initial")) s.initial = number(j["initial"], where + ".initial");
    return s;
  }
  if (type == "random_noise") {
    allow_keys(j, where, {"type", "magnitude"});
    RandomNoise s;
    if (j.contains("magnitude")) s.magnitude = number(j["magnitude"], where + ".magnitude");
    return s;
  }
  if (type == "false_timestamp") {
    allow_keys(j, where, {"type", "offset", "omit"});
    FalseTimestamp s;
    if (j.contains("offset")) s.offset = integer(j["offset"], where + ".offset");
    if (j.contains("omit")) s.omit = boolean(j["omit"], where + ".omit");
    return s;
  }
  if (type == "collusive_extremes") {
    allow_keys(j, where, {"type", "direction", "margin"});
    CollusiveExtremes s;
    if (j.contains("direction")) {
      const std::string d = text(j["direction"], where + ".direction");
      if (d == "high") s.direction = ExtremeDirection::High;
      else if (d == "low") s.direction = ExtremeDirection::Low;
      else if (d == "alternate") s.direction = ExtremeDirection::Alternate;
      else throw ParseError("unknown direction '" + d + "' in " + where);
    }
    if (j.contains("margin")) s.margin = number(j["margin"], where + ".margin");
    return s;
  }
  throw ParseError("unknown adversary type '" + type + "'");
}

json strategy_json(const AdversaryStrategy& s) {
  return std::visit(
      overloaded{
          [](const Silent&) { return json{{"type", "silent"}}; },
          [](const ConstantSpoof& c) { return json{{"type", "constant_spoof"}, {"initial", c.initial}}; },
          [](const RandomNoise& c) { return json{{"type", "random_noise"}, {"magnitude", c.magnitude}}; },
          [](const FalseTimestamp& c) {
            return json{{"type", "false_timestamp"}, {"offset", c.offset}, {"omit", c.omit}};
          },
          [](const CollusiveExtremes& c) {
            const char* d = c.direction == ExtremeDirection::High  ? "high"
                            : c.direction == ExtremeDirection::Low ? "low"
                                                                   : "alternate";
            return json{{"type", "collusive_extremes"}, {"direction", d}, {"margin", c.margin}};
          },
          [](const ScriptedHook&) -> json {
            throw ConfigInvalid("scripted adversaries cannot be serialized");
          },
      },
      s);
}

ChannelSpec channel_from_json(const json& j) {
  const std::string where = "channel";
  require_object(j, where);
  const std::string type = text(need(j, "type", where), "channel.type");
  auto window = [&](int fallback) {
    return j.contains("T") ? static_cast<int>(integer(j["T"], "channel.T")) : fallback;
  };
  if (type == "ideal") {
    allow_keys(j, where, {"type"});
    return IdealChannel{};
  }
  if (type == "windowed_union") {
    allow_keys(j, where, {"type", "T", "baseline_activity"});
    WindowedUnionChannel c;
    c.T = window(c.T);
    if (j.contains("baseline_activity")) {
      c.baseline_activity = number(j["baseline_activity"], "channel.baseline_activity");
    }
    return c;
  }
  if (type == "bounded_delay") {
    allow_keys(j, where, {"type", "T"});
    return BoundedDelayChannel{window(1)};
  }
  if (type == "bernoulli_erasure") {
    allow_keys(j, where, {"type", "p"});
    return BernoulliErasureChannel{number(need(j, "p", where), "channel.p")};
  }
  if (type == "erasure_with_delay") {
    allow_keys(j, where, {"type", "e", "T"});
    return ErasureWithDelayChannel{number(need(j, "e", where), "channel.e"), window(1)};
  }
  throw ParseError("unknown channel type '" + type + "'");
}

json channel_json(const ChannelSpec& c) {
  return std::visit(
      overloaded{
          [](const IdealChannel&) { return json{{"type", "ideal"}}; },
          [](const WindowedUnionChannel& w) {
            return json{{"type", "windowed_union"}, {"T", w.T}, {"baseline_activity", w.baseline_activity}};
          },
          [](const BoundedDelayChannel& b) { return json{{"type", "bounded_delay"}, {"T", b.T}}; },
          [](const BernoulliErasureChannel& b) { return json{{"type", "bernoulli_erasure"}, {"p", b.p}}; },
          [](const ErasureWithDelayChannel& e) {
            return json{{"type", "erasure_with_delay"}, {"e", e.e}, {"T", e.T}};
          },
      },
      c);
}

Digraph graph_from_json(const json& j, int expected_nodes) {
  allow_keys(j, "graph", {"nodes", "edges", "complete"});
  const int nodes = j.contains("nodes") ? static_cast<int>(integer(j["nodes"], "graph.nodes"))
                                        : expected_nodes;
  if (nodes < 1 || nodes > kMaxNodes) {
    throw ParseError("graph.nodes must lie in 1.." + std::to_string(kMaxNodes));
  }
  const bool complete = j.contains("complete") && boolean(j["complete"], "graph.complete");
  if (complete) {
    if (j.contains("edges")) throw ParseError("graph gives both 'edges' and 'complete'");
    return Digraph::complete(nodes);
  }
  const json& edges = need(j, "edges", "graph");
  if (!edges.is_array()) throw ParseError("graph.edges must be a list of [from, to] pairs");
  Digraph g(nodes);
  for (const json& e : edges) {
    if (!e.is_array() || e.size() != 2) throw ParseError("graph.edges entries must be [from, to]");
    const auto from = integer(e[0], "edge endpoint");
    const auto to = integer(e[1], "edge endpoint");
    if (from < 1 || to < 1 || from > nodes || to > nodes) {
      throw ParseError("edge (" + std::to_string(from) + "," + std::to_string(to) +
                       ") is out of range");
    }
    try {
      g.add_edge(static_cast<NodeId>(from - 1), static_cast<NodeId>(to - 1));
    } catch (const InvalidGraph& err) {
      throw ParseError(std::string("graph.edges: ") + err.what());
    }
  }
  return g;
}

}  // namespace

SimConfig scenario_from_json(const json& j) {
  allow_keys(j, "scenario",
             {"schema_version", "name", "plant", "graph", "f", "adversaries", "channel", "protocol",
              "horizon", "x0", "gamma_local", "weights", "frame", "seed", "trials", "tolerance",
              "value_cap"});
  const auto version = integer(need(j, "schema_version", "scenario"), "schema_version");
  if (version != kSchemaVersion) {
    throw ParseError("unsupported schema_version " + std::to_string(version));
  }
  SimConfig cfg;
  if (j.contains("name")) cfg.name = text(j["name"], "name");

  const json& plant = need(j, "plant", "scenario");
  allow_keys(plant, "plant", {"A", "C"});
  cfg.plant.A = matrix(need(plant, "A", "plant"), "plant.A");
  const json& sensors = need(plant, "C", "plant");
  if (!sensors.is_array()) throw ParseError("plant.C must be a list of per-node matrices");
  for (std::size_t i = 0; i < sensors.size(); ++i) {
    cfg.plant.sensors.push_back(
        matrix(sensors[i], "plant.C[" + std::to_string(i + 1) + "]", cfg.plant.A.cols()));
  }

  cfg.graph = graph_from_json(need(j, "graph", "scenario"), static_cast<int>(sensors.size()));
  if (j.contains("f")) cfg.f = static_cast<int>(integer(j["f"], "f"));

  if (j.contains("adversaries")) {
    const json& advs = j["adversaries"];
    if (!advs.is_array()) throw ParseError("adversaries must be a list");
    for (std::size_t a = 0; a < advs.size(); ++a) {
      const std::string where = "adversaries[" + std::to_string(a + 1) + "]";
      allow_keys(advs[a], where, {"node", "strategy"});
      const auto node = integer(need(advs[a], "node", where), where + ".node");
      if (node < 1) throw ParseError(where + ".node must be >= 1");
      const AdversaryStrategy s = advs[a].contains("strategy")
                                      ? strategy_from_json(advs[a]["strategy"], where + ".strategy")
                                      : AdversaryStrategy{Silent{}};
      cfg.adversaries.push_back({static_cast<NodeId>(node - 1), s});
    }
  }

  if (j.contains("channel")) cfg.channel = channel_from_json(j["channel"]);

  if (j.contains("protocol")) {
    const json& p = j["protocol"];
    allow_keys(p, "protocol", {"variant", "m"});
    const std::string v = text(need(p, "variant", "protocol"), "protocol.variant");
    if (v == "sw_lfse") {
      cfg.protocol = ProtocolVariant::SwLfse;
      if (p.contains("m")) throw ParseError("protocol.m only applies to lfse");
    } else if (v == "lfse") {
      cfg.protocol = ProtocolVariant::Lfse;
      if (p.contains("m")) cfg.robustness_m = static_cast<int>(integer(p["m"], "protocol.m"));
    } else {
      throw ParseError("unknown protocol variant '" + v + "'");
    }
  }

  if (j.contains("horizon")) {
    const json& h = j["horizon"];
    if (h.is_string()) {
      if (h.get<std::string>() != "auto") throw ParseError("horizon must be an integer or \"auto\"");
    } else {
      cfg.horizon = integer(h, "horizon");
    }
  }

  const json& x0 = need(j, "x0", "scenario");
  if (!x0.is_array()) throw ParseError("x0 must be a list");
  cfg.x0.resize(static_cast<Eigen::Index>(x0.size()));
  for (std::size_t i = 0; i < x0.size(); ++i) cfg.x0(static_cast<Eigen::Index>(i)) = number(x0[i], "x0");

  if (j.contains("gamma_local")) cfg.gamma_local = number(j["gamma_local"], "gamma_local");
  if (j.contains("weights")) {
    const std::string w = text(j["weights"], "weights");
    if (w == "uniform") cfg.weights = WeightRule::Uniform;
    else if (w == "median") cfg.weights = WeightRule::Median;
    else throw ParseError("unknown weights '" + w + "'");
  }
  if (j.contains("frame")) {
    const std::string fr = text(j["frame"], "frame");
    if (fr == "absolute") cfg.frame = Frame::Absolute;
    else if (fr == "deviation") cfg.frame = Frame::Deviation;
    else throw ParseError("unknown frame '" + fr + "'");
  }
  if (j.contains("seed")) {
    if (!j["seed"].is_number_unsigned()) throw ParseError("seed must be a non-negative integer");
    cfg.seed = j["seed"].get<std::uint64_t>();
  }
  if (j.contains("trials")) cfg.trials = static_cast<int>(integer(j["trials"], "trials"));
  if (j.contains("tolerance")) cfg.tolerance = number(j["tolerance"], "tolerance");
  if (j.contains("value_cap")) cfg.value_cap = number(j["value_cap"], "value_cap");
  return cfg;
}

json scenario_to_json(const SimConfig& cfg) {
  json j;
  j["schema_version"] = kSchemaVersion;
  j["name"] = cfg.name;
  json sensors = json::array();
  for (const auto& C : cfg.plant.sensors) sensors.push_back(matrix_json(C));
  j["plant"] = {{"A", matrix_json(cfg.plant.A)}, {"C", sensors}};
  json edges = json::array();
  for (const Edge& e : cfg.graph.edges()) edges.push_back({e.from + 1, e.to + 1});
  j["graph"] = {{"nodes", cfg.graph.size()}, {"edges", edges}};
  j["f"] = cfg.f;
  json advs = json::array();
  for (const auto& a : cfg.adversaries) {
    advs.push_back({{"node", a.node + 1}, {"strategy", strategy_json(a.strategy)}});
  }
  j["adversaries"] = advs;
  j["channel"] = channel_json(cfg.channel);
  j["protocol"] = cfg.protocol == ProtocolVariant::SwLfse
                      ? json{{"variant", "sw_lfse"}}
                      : json{{"variant", "lfse"}, {"m", cfg.robustness_m}};
  j["horizon"] = cfg.horizon ? json(*cfg.horizon) : json("auto");
  json x0 = json::array();
  for (Eigen::Index i = 0; i < cfg.x0.size(); ++i) x0.push_back(cfg.x0(i));
  j["x0"] = x0;
  j["gamma_local"] = cfg.gamma_local;
  j["weights"] = cfg.weights == WeightRule::Uniform ? "uniform" : "median";
  j["frame"] = cfg.frame == Frame::Absolute ? "absolute" : "deviation";
  j["seed"] = cfg.seed;
  j["trials"] = cfg.trials;
  j["tolerance"] = cfg.tolerance;
  j["value_cap"] = cfg.value_cap;
  return j;
}

SimConfig load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open scenario " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  return scenario_from_json(j);
}

void save_scenario(const std::filesystem::path& path, const SimConfig& cfg) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write " + path.string());
  out << scenario_to_json(cfg).dump(2) << '\n';
}

std::uint64_t config_digest(const SimConfig& cfg) {
  const std::string s = scenario_to_json(cfg).dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace resest
