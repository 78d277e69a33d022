#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "resest/graph.hpp"
#include "resest/report.hpp"
#include "resest/scenario.hpp"
#include "resest/sim.hpp"

namespace fs = std::filesystem;
using namespace resest;

namespace {

constexpr int kOk = 0;
constexpr int kVerdictFailed = 1;
constexpr int kInputError = 2;

// Verdict failures raised from deep inside the library (an invalid scenario
// is a "no" from the checker, not a malformed invocation).
struct VerdictError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

Digraph read_graph(const std::string& path, int nodes) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open graph file " + path);
  return parse_edge_list(in, nodes);
}

NodeSet parse_sources(const std::string& text, int nodes) {
  NodeSet s;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    std::size_t used = 0;
    int v = 0;
    try {
      v = std::stoi(item, &used);
    } catch (const std::exception&) {
      throw ParseError("bad source id '" + item + "'");
    }
    if (used != item.size() || v < 1 || v > nodes) {
      throw ParseError("source id '" + item + "' is out of range 1.." + std::to_string(nodes));
    }
    s.insert(v - 1);
  }
  return s;
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ParseError("cannot create output directory " + dir.string());
}

void write_json(const fs::path& path, const nlohmann::json& j) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

SimConfig load_with_overrides(const std::string& config, std::optional<std::uint64_t> seed,
                              std::optional<int> trials) {
  std::ifstream probe(config);
  if (!probe) throw ParseError("cannot open scenario " + config);
  nlohmann::json raw;
  try {
    raw = nlohmann::json::parse(probe);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(config + ": " + e.what());
  }
  SimConfig cfg = scenario_from_json(raw);
  // Seed: flag, then file, then 0.
  if (seed) cfg.seed = *seed;
  else if (!raw.contains("seed")) cfg.seed = 0;
  if (trials) cfg.trials = *trials;
  return cfg;
}

int run_check_robust(const std::string& graph, int nodes, const std::string& sources, int r) {
  const Digraph g = read_graph(graph, nodes);
  const NodeSet S = parse_sources(sources, g.size());
  if (r < 1) throw ParseError("--r must be >= 1");
  const PeelResult p = peel(g, S, r);
  if (p.complete()) {
    std::cout << "strongly " << r << "-robust w.r.t. " << to_string(S) << ": yes (" << p.levels.size()
              << " levels)\n";
    return kOk;
  }
  std::cout << "strongly " << r << "-robust w.r.t. " << to_string(S)
            << ": no; peeling stalls on " << to_string(p.residual) << '\n';
  return kVerdictFailed;
}

int run_build_medag(const std::string& graph, int nodes, const std::string& sources, int f,
                    const std::string& out) {
  const Digraph g = read_graph(graph, nodes);
  const NodeSet S = parse_sources(sources, g.size());
  if (f < 0) throw ParseError("--f must be >= 0");
  Medag m;
  try {
    m = build_medag(g, S, f);
  } catch (const NotRobust& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kVerdictFailed;
  }
  const std::string text = medag_to_json(m).dump(2);
  if (out.empty()) {
    std::cout << text << '\n';
  } else {
    std::ofstream o(out);
    if (!o) throw ParseError("cannot write " + out);
    o << text << '\n';
  }
  return kOk;
}

int run_simulate(const std::string& config, std::optional<std::uint64_t> seed, const fs::path& out) {
  const SimConfig cfg = load_with_overrides(config, seed, std::nullopt);
  Trace trace;
  try {
    trace = run_simulation(cfg);
  } catch (const ConfigInvalid& e) {
    throw VerdictError(e.what());
  }
  ensure_dir(out);
  {
    std::ofstream csv(out / "trace.csv");
    if (!csv) throw ParseError("cannot write " + (out / "trace.csv").string());
    write_trace_csv(csv, trace);
  }
  const nlohmann::json summary = trace_summary(trace, cfg);
  write_json(out / "trace.json", summary);
  std::cout << cfg.name << ": horizon " << trace.horizon << ", max final state error "
            << format_double(trace.max_state_error(trace.horizon)) << '\n';
  return kOk;
}

int run_mss_margin(bool sweep, double rho, int f, int m, double p, int m_min, int m_max,
                   double p_step, const std::string& out) {
  if (!(rho > 0.0)) throw ParseError("--rho must be positive");
  if (f < 0) throw ParseError("--f must be >= 0");
  if (!sweep) {
    if (m < 3) throw ParseError("m >= 3 is required, got m=" + std::to_string(m));
    const double pb = pbar(p, m, f);
    const bool ok = mss_criterion(rho, pb);
    std::cout << "rho,f,m,p,pbar,rho2_pbar,verdict\n"
              << format_double(rho) << ',' << f << ',' << m << ',' << format_double(p) << ','
              << format_double(pb) << ',' << format_double(rho * rho * pb) << ','
              << (ok ? "SATISFIED" : "VIOLATED") << '\n';
    return ok ? kOk : kVerdictFailed;
  }
  if (m_min < 3) throw ParseError("m >= 3 is required, got --m-min " + std::to_string(m_min));
  if (m_max < m_min) throw ParseError("--m-max must be >= --m-min");
  std::vector<int> ms;
  for (int v = m_min; v <= m_max; ++v) ms.push_back(v);
  const MarginTable t = sweep_mss_margin(rho, f, ms, probability_grid(0.0, 1.0, p_step));
  if (out.empty()) {
    write_margin_csv(std::cout, t);
  } else {
    std::ofstream o(out);
    if (!o) throw ParseError("cannot write " + out);
    write_margin_csv(o, t);
  }
  return kOk;
}

int run_montecarlo(const std::string& config, std::optional<std::uint64_t> seed, int trials,
                   unsigned threads, const fs::path& out) {
  if (trials < 1) throw ParseError("--trials must be >= 1");
  const SimConfig cfg = load_with_overrides(config, seed, trials);
  MssReport rep;
  try {
    rep = monte_carlo_mss(cfg, trials, threads);
  } catch (const ConfigInvalid& e) {
    throw VerdictError(e.what());
  }
  ensure_dir(out);
  {
    std::ofstream csv(out / "mss.csv");
    if (!csv) throw ParseError("cannot write " + (out / "mss.csv").string());
    write_mss_csv(csv, rep);
  }
  write_json(out / "mss.json", mss_summary(rep, cfg));
  double worst = 0.0;
  for (NodeId i : rep.regular) worst = std::max(worst, rep.mean(rep.horizon, i));
  std::cout << cfg.name << ": " << trials << " trials, rho^2 pbar = " << format_double(rep.margin)
            << ", max final mean-square error " << format_double(worst) << '\n';
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Resilient distributed state estimation over unreliable networks"};
  app.require_subcommand(1);

  std::string graph, sources, config, out_file;
  std::string out_dir = "./out";
  int nodes = 0, r = 1, f = 1, m = 3, m_min = 3, m_max = 8, trials = 100;
  unsigned threads = 0;
  double rho = 1.0, p = 0.0, p_step = 0.05;
  bool sweep = false;
  std::optional<std::uint64_t> seed;

  auto* robust = app.add_subcommand("check-robust", "test strong r-robustness by peeling");
  robust->add_option("--graph", graph, "edge list file (1-based 'from to' lines)")->required();
  robust->add_option("--sources", sources, "comma-separated source nodes")->required();
  robust->add_option("--r", r, "required in-degree from earlier levels")->required();
  robust->add_option("--nodes", nodes, "node count (default: largest id in the file)");

  auto* medag = app.add_subcommand("build-medag", "build a mode estimation DAG (r = 2f+1)");
  medag->add_option("--graph", graph, "edge list file")->required();
  medag->add_option("--sources", sources, "comma-separated source nodes")->required();
  medag->add_option("--f", f, "adversaries tolerated per neighborhood")->required();
  medag->add_option("--nodes", nodes, "node count");
  medag->add_option("--out", out_file, "write JSON here instead of stdout");

  auto* sim = app.add_subcommand("simulate", "run one scenario and write trace.csv/trace.json");
  sim->add_option("--config", config, "scenario JSON")->required();
  sim->add_option("--seed", seed, "master seed (default: scenario value, else 0)");
  sim->add_option("--out", out_dir, "output directory")->capture_default_str();

  auto* margin = app.add_subcommand("mss-margin", "evaluate rho^2 pbar < 1");
  margin->add_option("--rho", rho, "spectral radius")->required();
  margin->add_option("--f", f, "adversaries tolerated per neighborhood")->capture_default_str();
  margin->add_option("--m", m, "redundancy factor (m >= 3)")->capture_default_str();
  margin->add_option("--p", p, "per-link erasure probability")->capture_default_str();
  margin->add_flag("--sweep", sweep, "tabulate over m and p");
  margin->add_option("--m-min", m_min, "sweep: smallest m")->capture_default_str();
  margin->add_option("--m-max", m_max, "sweep: largest m")->capture_default_str();
  margin->add_option("--p-step", p_step, "sweep: p grid step")->capture_default_str();
  margin->add_option("--out", out_file, "sweep: write CSV here instead of stdout");

  auto* mc = app.add_subcommand("montecarlo", "mean-square error over seeded LFSE trials");
  mc->add_option("--config", config, "scenario JSON")->required();
  mc->add_option("--seed", seed, "master seed (default: scenario value, else 0)");
  mc->add_option("--trials", trials, "number of trials")->capture_default_str();
  mc->add_option("--threads", threads, "worker threads (0: all cores)");
  mc->add_option("--out", out_dir, "output directory")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kInputError;
  }

  try {
    if (*robust) return run_check_robust(graph, nodes, sources, r);
    if (*medag) return run_build_medag(graph, nodes, sources, f, out_file);
    if (*sim) return run_simulate(config, seed, out_dir);
    if (*margin) return run_mss_margin(sweep, rho, f, m, p, m_min, m_max, p_step, out_file);
    if (*mc) {
      if (!mc->count("--trials")) {
        // Scenario value wins over the built-in default when no flag is given.
        std::ifstream probe(config);
        nlohmann::json raw;
        if (probe) {
          try {
            raw = nlohmann::json::parse(probe);
          } catch (const nlohmann::json::exception&) {
          }
        }
        if (raw.is_object() && raw.contains("trials") && raw["trials"].is_number_integer()) {
          trials = raw["trials"].get<int>();
        }
      }
      return run_montecarlo(config, seed, trials, threads, out_dir);
    }
  } catch (const VerdictError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kVerdictFailed;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInputError;
  } catch (const ConfigInvalid& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kVerdictFailed;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInputError;
  }
  return kInputError;
}
