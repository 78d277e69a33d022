#include "resest/report.hpp"

#include <charconv>
#include <cstdio>

#include "resest/scenario.hpp"

namespace resest {

using nlohmann::json;

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string hex_digest(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

void write_trace_csv(std::ostream& os, const Trace& trace) {
  os << "k,node,mode,estimate,truth,abs_error\n";
  for (const TraceRow& r : trace.rows) {
    os << r.k << ',' << r.node + 1 << ',' << r.mode + 1 << ',' << format_double(r.estimate) << ','
       << format_double(r.truth) << ',' << format_double(r.abs_error) << '\n';
  }
}

json trace_summary(const Trace& trace, const SimConfig& cfg) {
  json finals = json::object();
  for (NodeId i : trace.regular) {
    finals[std::to_string(i + 1)] = trace.state_error_at(trace.horizon, i);
  }
  const double worst = trace.max_state_error(trace.horizon);
  return {
      {"scenario", trace.scenario},
      {"seed", trace.seed},
      {"config_digest", hex_digest(config_digest(cfg))},
      {"channel_digest", hex_digest(trace.channel_digest)},
      {"horizon", trace.horizon},
      {"tolerance", cfg.tolerance},
      {"final_state_error", finals},
      {"max_final_state_error", worst},
      {"converged", worst < cfg.tolerance},
  };
}

void write_mss_csv(std::ostream& os, const MssReport& rep) {
  os << "k,node,mean_sq_error,ci_half_width\n";
  for (Step k = 0; k <= rep.horizon; ++k) {
    for (NodeId i : rep.regular) {
      os << k << ',' << i + 1 << ',' << format_double(rep.mean(k, i)) << ','
         << format_double(rep.half(k, i)) << '\n';
    }
  }
}

json mss_summary(const MssReport& rep, const SimConfig& cfg) {
  json finals = json::object();
  for (NodeId i : rep.regular) finals[std::to_string(i + 1)] = rep.mean(rep.horizon, i);
  return {
      {"scenario", rep.scenario},
      {"seed", rep.seed},
      {"config_digest", hex_digest(config_digest(cfg))},
      {"trials", rep.trials},
      {"horizon", rep.horizon},
      {"rho", rep.rho},
      {"p", rep.p},
      {"pbar", rep.pbar_value},
      {"rho2_pbar", rep.margin},
      {"criterion_satisfied", rep.criterion},
      {"final_mean_sq_error", finals},
  };
}

void write_margin_csv(std::ostream& os, const MarginTable& table) {
  os << 'p';
  for (int m : table.ms) os << ",m=" << m;
  os << '\n';
  for (std::size_t r = 0; r < table.ps.size(); ++r) {
    os << format_double(table.ps[r]);
    for (double v : table.values[r]) os << ',' << format_double(v);
    os << '\n';
  }
}

json medag_to_json(const Medag& m) {
  json levels = json::array();
  for (int q = 0; q <= m.depth; ++q) {
    json level = json::array();
    for (NodeId i : m.level_set(q)) level.push_back(i + 1);
    levels.push_back(level);
  }
  json nbrs = json::object();
  for (NodeId i = 0; i < m.size(); ++i) {
    const NodeSet& s = m.neighbors[static_cast<std::size_t>(i)];
    if (s.empty()) continue;
    json list = json::array();
    for (NodeId l : s) list.push_back(l + 1);
    nbrs[std::to_string(i + 1)] = list;
  }
  return {{"depth", m.depth}, {"levels", levels}, {"neighbors", nbrs}};
}

}  // namespace resest
