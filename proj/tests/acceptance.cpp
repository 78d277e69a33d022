// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fail.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "resest/graph.hpp"
#include "resest/protocol.hpp"
#include "resest/report.hpp"
#include "resest/scenario.hpp"
#include "resest/sim.hpp"

using namespace resest;

namespace {

const std::string kScenarios = RESEST_SCENARIO_DIR;

// Relative rounding allowance on the pointwise envelope check, scaled by the
// magnitude of the true mode (absolute frame) or its initial value.
constexpr double kEnvelopeSlack = 1e-12;

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Timer {
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }
};

std::vector<Edge> all_pairs(int n) {
  std::vector<Edge> pairs;
  for (NodeId a = 0; a < n; ++a) {
    for (NodeId b = 0; b < n; ++b) {
      if (a != b) pairs.push_back({a, b});
    }
  }
  return pairs;
}

Digraph graph_from_mask(int n, const std::vector<Edge>& pairs, std::uint64_t mask) {
  std::vector<Edge> edges;
  for (std::size_t e = 0; e < pairs.size(); ++e) {
    if ((mask >> e) & 1U) edges.push_back(pairs[e]);
  }
  return Digraph(n, edges);
}

Digraph random_graph(int n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> density(0.3, 0.95);
  std::bernoulli_distribution coin(density(rng));
  Digraph g(n);
  for (const Edge& e : all_pairs(n)) {
    if (coin(rng)) g.add_edge(e.from, e.to);
  }
  return g;
}

std::vector<NodeSet> small_subsets(int n, int max_size) {
  std::vector<NodeSet> out;
  for (std::uint64_t b = 1; b < (std::uint64_t{1} << n); ++b) {
    if (std::popcount(b) <= max_size) out.push_back(NodeSet::from_bits(b));
  }
  return out;
}

NodeSet random_sources(int n, std::mt19937_64& rng) {
  const auto subsets = small_subsets(n, 3);
  return subsets[rng() % subsets.size()];
}

// Sample for the MEDAG and robustness checks: every digraph on up to 5 nodes,
// then random ones on 6 and 7 nodes.
void for_each_graph(const std::function<void(const Digraph&, NodeSet)>& exhaustive_fn,
                    const std::function<void(const Digraph&, NodeSet)>& random_fn) {
  for (int n = 1; n <= 5; ++n) {
    const auto pairs = all_pairs(n);
    const auto sources = small_subsets(n, 3);
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << pairs.size()); ++mask) {
      const Digraph g = graph_from_mask(n, pairs, mask);
      for (NodeSet S : sources) exhaustive_fn(g, S);
    }
  }
  std::mt19937_64 rng(20240501);
  for (int t = 0; t < 10000; ++t) {
    const int n = 6 + t % 2;
    const Digraph g = random_graph(n, rng);
    random_fn(g, random_sources(n, rng));
  }
}

Outcome criterion1() {
  long checked = 0, robust = 0, mismatches = 0;
  auto check = [&](const Digraph& g, NodeSet S) {
    for (int r = 1; r <= 3; ++r) {
      const bool a = is_strongly_r_robust(g, S, r);
      const bool b = brute_force_strongly_r_robust(g, S, r);
      ++checked;
      robust += a ? 1 : 0;
      mismatches += a != b ? 1 : 0;
    }
  };
  for_each_graph(check, check);
  std::ostringstream os;
  os << checked << " (graph, S, r) cases, " << robust << " robust, " << mismatches
     << " disagreements";
  return {mismatches == 0, os.str()};
}

Outcome criterion2() {
  bool ok = true;
  std::ostringstream os;
  for (int n : {3, 5, 10}) {
    const Digraph g = Digraph::complete(n + 2);
    const NodeSet S{n, n + 1};
    const NodeSet clique = NodeSet::first(n);
    const bool two = is_strongly_r_robust(g, S, 2) && brute_force_strongly_r_robust(g, S, 2);
    const bool three = is_strongly_r_robust(g, S, 3) || brute_force_strongly_r_robust(g, S, 3);
    bool witness = false;
    try {
      build_medag(g, S, 1);
    } catch (const NotRobust& e) {
      witness = e.residual() == clique;
    }
    ok = ok && two && !three && witness;
    os << "N=" << n << (two && !three && witness ? " ok " : " FAILED ");
  }
  return {ok, os.str()};
}

bool f_local(const Digraph& g, NodeSet adv, int f) {
  for (NodeId i : g.nodes() - adv) {
    if ((g.in_neighbors(i) & adv).size() > f) return false;
  }
  return true;
}

// Level structure checked independently of verify_medag.
bool dag_invariants(const Digraph& g, const Medag& m, NodeSet S, int f) {
  for (NodeId i = 0; i < g.size(); ++i) {
    const auto idx = static_cast<std::size_t>(i);
    if ((m.level[idx] == 0) != S.contains(i)) return false;
    if (!m.neighbors[idx].is_subset_of(g.in_neighbors(i))) return false;
    if (m.level[idx] > 0 && m.neighbors[idx].size() < 2 * f + 1) return false;
    for (NodeId l : m.neighbors[idx]) {
      if (m.level[static_cast<std::size_t>(l)] >= m.level[idx]) return false;
    }
  }
  return true;
}

Outcome criterion3() {
  long medags = 0, placements = 0, failures = 0;
  std::string first;
  auto check = [&](const Digraph& g, NodeSet S) {
    const int n = g.size();
    for (int f = 0; f <= 2; ++f) {
      if (!is_strongly_r_robust(g, S, 2 * f + 1)) continue;
      const Medag m = build_medag(g, S, f);
      ++medags;
      if (!dag_invariants(g, m, S, f)) {
        ++failures;
        continue;
      }
      for (std::uint64_t b = 0; b < (std::uint64_t{1} << n); ++b) {
        const NodeSet adv = NodeSet::from_bits(b);
        if (!f_local(g, adv, f)) continue;
        ++placements;
        const MedagCheck c = verify_medag(g, m, S, f, adv);
        if (!c) {
          if (failures == 0) first = c.diagnostic;
          ++failures;
        }
      }
    }
  };
  for_each_graph(check, check);
  std::ostringstream os;
  os << medags << " MEDAGs, " << placements << " f-local placements, " << failures << " failures";
  if (!first.empty()) os << " (" << first << ")";
  return {failures == 0, os.str()};
}

Outcome criterion4() {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> regular(-10.0, 10.0);
  std::uniform_real_distribution<double> hostile(-1e6, 1e6);
  long draws = 0, violations = 0;
  for (int size = 3; size <= 7; ++size) {
    for (int f = 1; f <= 2; ++f) {
      if (size < 2 * f + 1) continue;
      for (std::uint64_t b = 0; b < (std::uint64_t{1} << size); ++b) {
        if (std::popcount(b) > f) continue;
        for (int d = 0; d < 1000; ++d) {
          std::vector<Valued> v;
          double lo = 1e300, hi = -1e300;
          for (int i = 0; i < size; ++i) {
            const bool bad = (b >> i) & 1U;
            // hostile values either far away or planted at the regular extremes
            const double x = bad ? (d % 3 == 0 ? regular(rng) : hostile(rng)) : regular(rng);
            v.push_back({i, x});
            if (!bad) {
              lo = std::min(lo, x);
              hi = std::max(hi, x);
            }
          }
          ++draws;
          for (const Valued& k : trim_extremes(v, f).kept) {
            if (k.value < lo || k.value > hi) ++violations;
          }
        }
      }
    }
  }
  std::ostringstream os;
  os << draws << " trimmed draws, " << violations << " kept values outside the regular range";
  return {violations == 0, os.str()};
}

// Envelope and final-error check for one configuration.
bool converges(const SimConfig& cfg, std::uint64_t seed, std::string& why, double& worst_ratio) {
  const Design d = prepare(cfg);
  const Trace t = run_simulation(cfg, d, seed);
  const EnvelopeCheck env = check_envelope(t, cfg, d, kEnvelopeSlack);
  worst_ratio = std::max(worst_ratio, env.worst_ratio);
  const double final_error = t.max_state_error(t.horizon);
  if (!env.ok()) {
    why = cfg.name + ": " + env.first_violation;
    return false;
  }
  if (!(final_error < 1e-6)) {
    why = cfg.name + ": final error " + format_double(final_error) + " at K=" +
          std::to_string(t.horizon);
    return false;
  }
  return true;
}

std::vector<AdversaryStrategy> all_strategies() {
  return {Silent{}, ConstantSpoof{50.0}, RandomNoise{10.0}, FalseTimestamp{-3, false},
          FalseTimestamp{0, true}, CollusiveExtremes{ExtremeDirection::Alternate, 5.0},
          CollusiveExtremes{ExtremeDirection::High, 0.0}};
}

Outcome criterion5() {
  int runs = 0;
  double worst = 0.0;
  std::string why;
  bool ok = converges(load_scenario(kScenarios + "/clique5_swlfse.json"), 0, why, worst);
  ++runs;
  const SimConfig base = load_scenario(kScenarios + "/ring10_windowed.json");
  for (int T : {1, 3}) {
    for (const auto& s : all_strategies()) {
      SimConfig cfg = base;
      cfg.channel = WindowedUnionChannel{T, 0.5};
      cfg.adversaries.front().strategy = s;
      cfg.name = "ring10 T=" + std::to_string(T) + " " + strategy_name(s);
      ++runs;
      if (!converges(cfg, 0, why, worst)) ok = false;
    }
  }
  std::ostringstream os;
  os << runs << " runs, worst |e|/envelope " << format_double(worst);
  if (!ok) os << "; " << why;
  return {ok, os.str()};
}

Outcome criterion6() {
  int runs = 0;
  double worst = 0.0;
  std::string why;
  bool ok = true;
  const SimConfig delay = load_scenario(kScenarios + "/ring10_delay.json");
  for (const auto& s : all_strategies()) {
    SimConfig cfg = delay;
    cfg.adversaries.front().strategy = s;
    cfg.name = "bounded delay " + strategy_name(s);
    ++runs;
    if (!converges(cfg, 0, why, worst)) ok = false;
  }
  const SimConfig erasure = load_scenario(kScenarios + "/ring10_erasure_delay.json");
  int converged = 0;
  for (int trial = 0; trial < 100; ++trial) {
    ++runs;
    if (converges(erasure, trial_seed(erasure.seed, trial), why, worst)) {
      ++converged;
    } else {
      ok = false;
    }
  }
  std::ostringstream os;
  os << runs << " runs, " << converged << "/100 erasure-with-delay trials converged, worst |e|/envelope "
     << format_double(worst);
  if (!ok) os << "; " << why;
  return {ok, os.str()};
}

Outcome criterion7() {
  bool ok = std::abs(pbar(0.1, 3, 1) - 0.271) <= 1e-12 && std::abs(pbar(0.5, 3, 1) - 0.875) <= 1e-12;
  ok = ok && pbar(0.0, 3, 1) == 0.0 && pbar(1.0, 3, 1) == 1.0;
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::ostringstream os;
  for (double p : {0.1, 0.5}) {
    const int n = 100000;
    int short_steps = 0;
    for (int s = 0; s < n; ++s) {
      int delivered = 0;
      for (int l = 0; l < 3; ++l) delivered += u(rng) >= p ? 1 : 0;
      short_steps += delivered < 3 ? 1 : 0;
    }
    const double exact = pbar(p, 3, 1);
    const double est = static_cast<double>(short_steps) / n;
    const double sigma = std::sqrt(exact * (1 - exact) / n);
    const bool within = std::abs(est - exact) <= 3 * sigma;
    ok = ok && within;
    os << "p=" << p << " exact " << format_double(exact) << " sampled " << est << "; ";
  }
  return {ok, os.str()};
}

Outcome criterion8() {
  const MarginTable t = sweep_mss_margin(2.0, 3, {3, 4, 5, 6}, probability_grid(0.0, 1.0, 0.01));
  long comparisons = 0, bad = 0;
  for (std::size_t r = 0; r < t.ps.size(); ++r) {
    for (std::size_t c = 0; c < t.ms.size(); ++c) {
      if (r > 0) {
        ++comparisons;
        bad += t.values[r][c] < t.values[r - 1][c] ? 1 : 0;
      }
      if (c > 0) {
        ++comparisons;
        bad += t.values[r][c] > t.values[r][c - 1] ? 1 : 0;
      }
    }
  }
  std::ostringstream os;
  os << t.ps.size() << "x" << t.ms.size() << " grid, " << comparisons << " comparisons, " << bad
     << " monotonicity breaks";
  return {bad == 0, os.str()};
}

Outcome criterion9() {
  const SimConfig cfg = load_scenario(kScenarios + "/mss_bernoulli.json");
  const MssReport rep = monte_carlo_mss(cfg, 500);
  bool ok = rep.criterion && rep.horizon == 300 && std::abs(rep.margin - 0.32791) < 1e-9;
  double worst_ratio = 0.0;
  std::string why;
  for (NodeId i : rep.regular) {
    const double ratio = rep.mean(300, i) / rep.mean(0, i);
    worst_ratio = std::max(worst_ratio, ratio);
    if (!(ratio <= 1e-3)) ok = false;
    // 20-step trailing moving average, strictly decreasing from k = 50 on
    std::vector<double> avg;
    for (Step k = 19; k <= 300; ++k) {
      double s = 0.0;
      for (Step q = k - 19; q <= k; ++q) s += rep.mean(q, i);
      avg.push_back(s / 20.0);
    }
    for (Step k = 51; k <= 300; ++k) {
      if (!(avg[static_cast<std::size_t>(k - 19)] < avg[static_cast<std::size_t>(k - 20)])) {
        ok = false;
        if (why.empty()) why = "node " + std::to_string(i + 1) + " average rises at k=" + std::to_string(k);
      }
    }
  }
  std::ostringstream os;
  os << "rho^2 pbar = " << format_double(rep.margin) << ", 500 trials, worst E|e|^2[300]/E|e|^2[0] = "
     << format_double(worst_ratio);
  if (!why.empty()) os << "; " << why;
  return {ok, os.str()};
}

Outcome criterion10() {
  const char* names[] = {"clique5_swlfse", "ring10_windowed", "ring10_delay", "ring10_erasure_delay",
                         "mss_bernoulli"};
  bool ok = true;
  std::ostringstream os;
  for (const char* name : names) {
    const SimConfig cfg = load_scenario(kScenarios + "/" + name + ".json");
    auto render = [&] {
      std::ostringstream out;
      const Trace t = run_simulation(cfg);
      write_trace_csv(out, t);
      out << trace_summary(t, cfg).dump();
      return out.str();
    };
    const bool same = render() == render();
    ok = ok && same;
    if (!same) os << name << " differs; ";
  }
  const SimConfig mc = load_scenario(kScenarios + "/mss_bernoulli.json");
  auto mss = [&](unsigned threads) {
    std::ostringstream out;
    write_mss_csv(out, monte_carlo_mss(mc, 100, threads));
    return out.str();
  };
  const bool mc_same = mss(1) == mss(4);
  ok = ok && mc_same;
  os << "5 scenarios traced twice, Monte Carlo with 1 and 4 threads "
     << (mc_same ? "identical" : "differs");
  return {ok, os.str()};
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    Outcome (*run)();
  };
  const Criterion criteria[] = {
      {"robustness oracle equivalence", criterion1},
      {"two-source clique is 2- but not 3-robust", criterion2},
      {"MEDAG soundness", criterion3},
      {"trimming safety", criterion4},
      {"sliding-window envelope and convergence", criterion5},
      {"bounded delay and erasure with delay", criterion6},
      {"effective drop probability", criterion7},
      {"margin sweep monotonicity", criterion8},
      {"mean-square stability", criterion9},
      {"determinism", criterion10},
  };
  int failed = 0;
  int index = 0;
  for (const Criterion& c : criteria) {
    ++index;
    const Timer timer;
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    char secs[32];
    std::snprintf(secs, sizeof secs, "%.1fs", timer.seconds());
    std::cout << (o.pass ? "PASS" : "FAIL") << "  " << index << ". " << c.name << ": " << o.detail
              << " [" << secs << "]" << std::endl;
    failed += o.pass ? 0 : 1;
  }
  std::cout << (failed == 0 ? "all criteria passed" : std::to_string(failed) + " criteria failed")
            << std::endl;
  return failed == 0 ? 0 : 1;
}
