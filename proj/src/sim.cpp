#include "resest/sim.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <deque>
#include <limits>
#include <map>
#include <random>
#include <string>
#include <thread>

namespace resest {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

std::string one_based(int i) { return std::to_string(i + 1); }

std::string redundancy_name(const SimConfig& cfg) {
  if (cfg.protocol == ProtocolVariant::SwLfse) {
    return "strongly (2f+1)-robust (r=" + std::to_string(2 * cfg.f + 1) + ")";
  }
  return "strongly (mf+1)-robust (r=" + std::to_string(cfg.robustness_m * cfg.f + 1) + ")";
}

struct Fnv {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  void add(std::uint64_t v) {
    for (int b = 0; b < 8; ++b) {
      h ^= (v >> (8 * b)) & 0xff;
      h *= 0x100000001b3ULL;
    }
  }
};

Step resolve_horizon(const SimConfig& cfg, const Design& design) {
  if (cfg.horizon) return *cfg.horizon;
  return envelope_horizon(cfg, design, cfg.tolerance);
}

std::size_t regular_index(const std::vector<NodeId>& regular, NodeId node) {
  const auto it = std::find(regular.begin(), regular.end(), node);
  if (it == regular.end()) throw DomainError("node " + one_based(node) + " is not regular");
  return static_cast<std::size_t>(it - regular.begin());
}

}  // namespace

Design prepare(const SimConfig& cfg) {
  try {
    cfg.plant.validate();
  } catch (const Error& e) {
    throw ConfigInvalid(std::string("plant: ") + e.what());
  }
  const int N = cfg.plant.nodes();
  const int n = cfg.plant.states();
  if (cfg.graph.size() != N) {
    throw ConfigInvalid("graph has " + std::to_string(cfg.graph.size()) + " nodes but the plant has " +
                        std::to_string(N) + " sensors");
  }
  if (cfg.x0.size() != n) throw ConfigInvalid("x0 must have one entry per state");
  if (cfg.f < 0) throw ConfigInvalid("f must be >= 0");
  if (!(cfg.gamma_local >= 0.0 && cfg.gamma_local < 1.0)) {
    throw ConfigInvalid("gamma_local must lie in [0,1)");
  }
  if (cfg.horizon && *cfg.horizon < 0) throw ConfigInvalid("horizon must be >= 0");
  if (cfg.trials < 1) throw ConfigInvalid("trials must be >= 1");
  if (!(cfg.tolerance > 0.0)) throw ConfigInvalid("tolerance must be positive");
  if (!(cfg.value_cap > 0.0)) throw ConfigInvalid("value cap must be positive");
  if (cfg.protocol == ProtocolVariant::Lfse && cfg.robustness_m < 3) {
    throw ConfigInvalid("LFSE requires m >= 3, got m=" + std::to_string(cfg.robustness_m));
  }
  if (cfg.frame == Frame::Deviation && cfg.protocol != ProtocolVariant::Lfse) {
    throw ConfigInvalid("the deviation frame is only available for LFSE");
  }
  try {
    validate(cfg.channel);
  } catch (const Error& e) {
    throw ConfigInvalid(std::string("channel: ") + e.what());
  }

  Design d;
  for (const AdversarySpec& a : cfg.adversaries) {
    if (a.node < 0 || a.node >= N) throw ConfigInvalid("adversary node out of range");
    if (d.adversaries.contains(a.node)) {
      throw ConfigInvalid("adversary node " + one_based(a.node) + " listed twice");
    }
    d.adversaries.insert(a.node);
  }
  if (!f_local_check(cfg.graph, d.adversaries, cfg.f)) {
    throw ConfigInvalid("adversary set " + to_string(d.adversaries) + " is not " +
                        std::to_string(cfg.f) + "-local");
  }
  d.regular = cfg.graph.nodes() - d.adversaries;

  try {
    d.modal = diagonalize(cfg.plant);
  } catch (const Error& e) {
    throw ConfigInvalid(std::string("plant: ") + e.what());
  }
  const ModalPlant& mp = d.modal;
  for (int j : mp.unstable) {
    if (source_set(mp, j).empty()) {
      throw ConfigInvalid("unstable mode " + one_based(j) + " (lambda=" +
                          std::to_string(mp.lambdas(j)) + ") is detected by no node");
    }
  }

  d.redundancy = cfg.protocol == ProtocolVariant::SwLfse ? 2 * cfg.f + 1
                                                         : cfg.robustness_m * cfg.f + 1;
  d.medags.resize(static_cast<std::size_t>(mp.modes()));
  for (int j : mp.consensus) {
    const NodeSet S = source_set(mp, j);
    try {
      d.medags[static_cast<std::size_t>(j)] =
          build_medag_with_redundancy(cfg.graph, S, d.redundancy, j);
    } catch (const NotRobust& e) {
      throw ConfigInvalid("graph is not " + redundancy_name(cfg) + " with respect to S_" +
                          one_based(j) + "=" + to_string(S) + "; peeling stalls on " +
                          to_string(e.residual()));
    }
  }

  d.observers.resize(static_cast<std::size_t>(N));
  for (NodeId i : d.regular) {
    if (mp.detectable[static_cast<std::size_t>(i)].empty()) continue;
    d.observers[static_cast<std::size_t>(i)] = design_local_observer(mp, i, cfg.gamma_local);
  }
  return d;
}

double Trace::state_error_at(Step k, NodeId node) const {
  const std::size_t r = regular_index(regular, node);
  return state_error.at(static_cast<std::size_t>(k) * regular.size() + r);
}

double Trace::max_state_error(Step k) const {
  double m = 0.0;
  for (std::size_t r = 0; r < regular.size(); ++r) {
    m = std::max(m, state_error.at(static_cast<std::size_t>(k) * regular.size() + r));
  }
  return m;
}

const TraceRow& Trace::row(Step k, NodeId node, int mode) const {
  const std::size_t r = regular_index(regular, node);
  const std::size_t idx =
      (static_cast<std::size_t>(k) * regular.size() + r) * static_cast<std::size_t>(modes) +
      static_cast<std::size_t>(mode);
  return rows.at(idx);
}

Trace run_simulation(const SimConfig& cfg, const RunOptions& options) {
  const Design design = prepare(cfg);
  return run_simulation(cfg, design, cfg.seed, options);
}

Trace run_simulation(const SimConfig& cfg, const Design& design, std::uint64_t seed,
                     const RunOptions& options) {
  const ModalPlant& mp = design.modal;
  const int N = cfg.graph.size();
  const int n = mp.modes();
  const Step K = resolve_horizon(cfg, design);
  const bool deviation = cfg.frame == Frame::Deviation;

  // Absolute truth, used for measurements (absolute frame) and reporting.
  Eigen::VectorXd x = cfg.x0;
  Eigen::VectorXd z = mp.V * cfg.x0;
  const Eigen::VectorXd z0 = z;
  // Truth as the nodes see it.
  Eigen::VectorXd z_node = deviation ? Eigen::VectorXd::Zero(n) : z;

  std::vector<NodeId> regular = design.regular.to_vector();
  std::vector<RegularNode> nodes;
  nodes.reserve(regular.size());
  for (NodeId i : regular) {
    std::vector<NodeSet> listen(static_cast<std::size_t>(n));
    for (int j : mp.consensus) {
      listen[static_cast<std::size_t>(j)] =
          design.medags[static_cast<std::size_t>(j)].neighbors[static_cast<std::size_t>(i)];
    }
    const Eigen::VectorXd initial = deviation ? Eigen::VectorXd(-z0) : Eigen::VectorXd::Zero(n);
    nodes.emplace_back(i, mp, design.observers[static_cast<std::size_t>(i)], std::move(listen),
                       cfg.f, cfg.protocol, cfg.weights, initial);
  }
  std::vector<int> slot_of(static_cast<std::size_t>(N), -1);
  for (std::size_t r = 0; r < regular.size(); ++r) slot_of[static_cast<std::size_t>(regular[r])] = static_cast<int>(r);

  Channel channel(cfg.channel, cfg.graph, seed, design.medags);
  const std::vector<Edge> links = cfg.graph.edges();
  std::map<Edge, std::size_t> link_index;
  for (std::size_t e = 0; e < links.size(); ++e) link_index[links[e]] = e;
  const int history_len = std::holds_alternative<ErasureWithDelayChannel>(cfg.channel)
                              ? channel.max_delay()
                              : 0;
  std::vector<std::deque<std::pair<Step, std::vector<EstimateMsg>>>> history(links.size());
  std::map<Step, std::vector<std::pair<NodeId, EstimateMsg>>> pending;

  std::map<NodeId, std::mt19937_64> adversary_rng;
  for (const AdversarySpec& a : cfg.adversaries) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(a.node), 0x61647673U};
    adversary_rng.emplace(a.node, std::mt19937_64(seq));
  }

  Trace trace;
  trace.scenario = cfg.name;
  trace.seed = seed;
  trace.horizon = K;
  trace.modes = n;
  trace.regular = regular;
  if (options.record_modes) {
    trace.rows.reserve(static_cast<std::size_t>(K + 1) * regular.size() * static_cast<std::size_t>(n));
  }
  trace.state_error.reserve(static_cast<std::size_t>(K + 1) * regular.size());

  std::vector<Eigen::VectorXd> estimates(static_cast<std::size_t>(N), Eigen::VectorXd::Zero(n));
  std::vector<Delivery> outcome(links.size());
  Fnv digest;

  for (Step k = 0;; ++k) {
    for (std::size_t r = 0; r < nodes.size(); ++r) {
      const Eigen::VectorXd err = nodes[r].estimates() - z_node;
      if (options.record_modes) {
        for (int j = 0; j < n; ++j) {
          const double est = deviation ? z(j) + nodes[r].estimates()(j) : nodes[r].estimates()(j);
          trace.rows.push_back({k, regular[r], j, est, z(j), std::abs(err(j))});
        }
      }
      trace.state_error.push_back((mp.V_inv * err).norm());
    }
    if (k == K) break;

    for (std::size_t e = 0; e < links.size(); ++e) {
      outcome[e] = channel.transmit(links[e], k);
      digest.add(static_cast<std::uint64_t>(k));
      digest.add(e);
      digest.add(outcome[e].delivered ? 1 : 0);
      digest.add(static_cast<std::uint64_t>(outcome[e].sent));
      digest.add(static_cast<std::uint64_t>(outcome[e].arrival));
    }

    // Packets handed to each link at this step.
    std::vector<std::vector<EstimateMsg>> packets(links.size());
    for (std::size_t r = 0; r < nodes.size(); ++r) {
      const std::vector<EstimateMsg> msgs = nodes[r].emit(k);
      for (NodeId to : cfg.graph.out_neighbors(regular[r])) {
        packets[link_index.at({regular[r], to})] = msgs;
      }
      estimates[static_cast<std::size_t>(regular[r])] = nodes[r].estimates();
    }
    if (!cfg.adversaries.empty()) {
      AdversaryContext ctx;
      ctx.step = k;
      ctx.plant = &mp;
      ctx.graph = &cfg.graph;
      ctx.medags = &design.medags;
      ctx.truth = &z_node;
      ctx.estimates = &estimates;
      ctx.adversaries = design.adversaries;
      ctx.channel = [&](Edge e) { return outcome.at(link_index.at(e)); };
      for (const AdversarySpec& a : cfg.adversaries) {
        for (Packet& p : adversary_emit(a.strategy, ctx, a.node, adversary_rng.at(a.node),
                                        cfg.value_cap)) {
          packets[link_index.at({a.node, p.receiver})] = std::move(p.messages);
        }
      }
    }

    for (std::size_t e = 0; e < links.size(); ++e) {
      const Delivery& out = outcome[e];
      if (out.delivered) {
        const std::vector<EstimateMsg>* payload = nullptr;
        if (out.sent == k) {
          payload = &packets[e];
        } else {
          for (const auto& [step, msgs] : history[e]) {
            if (step == out.sent) payload = &msgs;
          }
        }
        if (payload != nullptr) {
          auto& q = pending[out.arrival];
          for (const EstimateMsg& m : *payload) q.emplace_back(links[e].to, m);
        }
      }
      if (history_len > 0) {
        history[e].emplace_back(k, std::move(packets[e]));
        while (static_cast<int>(history[e].size()) > history_len) history[e].pop_front();
      }
    }

    if (auto it = pending.find(k); it != pending.end()) {
      for (const auto& [to, msg] : it->second) {
        const int r = slot_of[static_cast<std::size_t>(to)];
        if (r >= 0) nodes[static_cast<std::size_t>(r)].receive(msg, k);
      }
      pending.erase(it);
    }

    for (std::size_t r = 0; r < nodes.size(); ++r) {
      const Eigen::MatrixXd& C = cfg.plant.sensors[static_cast<std::size_t>(regular[r])];
      const Eigen::VectorXd y = deviation ? Eigen::VectorXd::Zero(C.rows()) : Eigen::VectorXd(C * x);
      nodes[r].update(k, y);
    }
    if (options.on_step) {
      options.on_step(StepView{k, &design, std::span<const RegularNode>(nodes), &z_node});
    }

    x = cfg.plant.A * x;
    z = mp.lambdas.cwiseProduct(z);
    if (!deviation) z_node = z;
  }
  trace.channel_digest = digest.h;
  return trace;
}

double rate_bound(int q, Step k, int N, int f, int T, double beta, double gamma, double lambda) {
  if (!(gamma > 0.0 && gamma < 1.0)) throw DomainError("gamma must lie in (0,1)");
  if (q < 0 || T < 0 || f < 0) throw DomainError("q, T and f must be >= 0");
  if (k < static_cast<Step>(T + 1) * q) {
    throw DomainError("the envelope applies only for k >= (T+1) q");
  }
  if (q > 0 && N - (2 * f + 1) < 1) throw DomainError("need N > 2f+1");
  const double X = (N - (2 * f + 1)) * std::pow(std::abs(lambda) / gamma, T + 1);
  return beta * std::pow(X, q) * std::pow(gamma, static_cast<double>(k));
}

std::vector<ModeConstants> derive_beta_gamma(const SimConfig& cfg, const Design& design) {
  const ModalPlant& mp = design.modal;
  const Eigen::VectorXd e0 = -(mp.V * cfg.x0);
  std::vector<ModeConstants> out;
  for (int j : mp.consensus) {
    ModeConstants c{j, 0.0, kGammaFloor};
    for (NodeId l : source_set(mp, j) & design.regular) {
      const ObserverGains& g = *design.observers[static_cast<std::size_t>(l)];
      Eigen::VectorXd local(static_cast<Eigen::Index>(g.modes.size()));
      for (std::size_t m = 0; m < g.modes.size(); ++m) local(static_cast<Eigen::Index>(m)) = e0(g.modes[m]);
      c.beta = std::max(c.beta, g.envelope_constants(local, kGammaFloor)(g.slot(j)));
      c.gamma = std::max(c.gamma, g.contraction());
    }
    c.gamma = std::max(c.gamma, kGammaFloor);
    out.push_back(c);
  }
  return out;
}

int envelope_window(const ChannelSpec& channel) {
  return std::visit(overloaded{
                        [](const IdealChannel&) { return 0; },
                        [](const WindowedUnionChannel& c) { return c.T; },
                        [](const BoundedDelayChannel& c) { return c.T; },
                        [](const ErasureWithDelayChannel& c) { return c.T; },
                        [](const BernoulliErasureChannel&) -> int {
                          throw DomainError("erasure links have no deterministic delay window");
                        },
                    },
                    channel);
}

double mode_error_bound(const SimConfig& cfg, const Design& design,
                        const std::vector<ModeConstants>& constants, NodeId node, int mode,
                        Step k) {
  const ModalPlant& mp = design.modal;
  const Eigen::VectorXd e0 = -(mp.V * cfg.x0);
  if (mp.detects(node, mode)) {
    const ObserverGains& g = *design.observers.at(static_cast<std::size_t>(node));
    Eigen::VectorXd local(static_cast<Eigen::Index>(g.modes.size()));
    for (std::size_t m = 0; m < g.modes.size(); ++m) local(static_cast<Eigen::Index>(m)) = e0(g.modes[m]);
    const double c = g.envelope_constants(local, kGammaFloor)(g.slot(mode));
    return c * std::pow(std::max(g.gamma, kGammaFloor), static_cast<double>(k));
  }
  if (!mp.is_unstable(mode)) {
    if (k == 0) return std::abs(e0(mode));
    return std::abs(e0(mode)) * std::pow(std::abs(mp.lambdas(mode)), static_cast<double>(k));
  }
  const auto it = std::find_if(constants.begin(), constants.end(),
                               [&](const ModeConstants& c) { return c.mode == mode; });
  if (it == constants.end()) throw DomainError("no envelope constants for mode");
  const int q = design.medags.at(static_cast<std::size_t>(mode)).level.at(static_cast<std::size_t>(node));
  const int T = envelope_window(cfg.channel);
  if (k < static_cast<Step>(T + 1) * q) return std::numeric_limits<double>::infinity();
  return rate_bound(q, k, cfg.graph.size(), cfg.f, T, it->beta, it->gamma, mp.lambdas(mode));
}

Step envelope_horizon(const SimConfig& cfg, const Design& design, double tolerance) {
  constexpr Step kLimit = 1'000'000;
  const ModalPlant& mp = design.modal;
  const auto constants = derive_beta_gamma(cfg, design);
  const double vnorm = mp.V_inv.operatorNorm();
  const int n = mp.modes();
  Step K = 0;
  // Each bound is non-increasing in k once it applies, so it suffices to
  // find the first k where all of them are below tolerance.
  for (NodeId i : design.regular) {
    while (true) {
      if (K > kLimit) throw ConfigInvalid("envelope does not reach the tolerance; set a horizon");
      Eigen::VectorXd b(n);
      for (int j = 0; j < n; ++j) b(j) = mode_error_bound(cfg, design, constants, i, j, K);
      if (vnorm * b.norm() < tolerance) break;
      ++K;
    }
  }
  return K;
}

EnvelopeCheck check_envelope(const Trace& trace, const SimConfig& cfg, const Design& design,
                             double relative_slack) {
  const ModalPlant& mp = design.modal;
  const auto constants = derive_beta_gamma(cfg, design);
  const int T = envelope_window(cfg.channel);
  const Eigen::VectorXd z0 = mp.V * cfg.x0;
  EnvelopeCheck out;
  for (const ModeConstants& c : constants) {
    const int j = c.mode;
    const Medag& m = design.medags[static_cast<std::size_t>(j)];
    for (NodeId i : design.regular) {
      const int q = m.level[static_cast<std::size_t>(i)];
      if (q == 0) continue;
      for (Step k = static_cast<Step>(T + 1) * q; k <= trace.horizon; ++k) {
        const TraceRow& row = trace.row(k, i, j);
        const double scale = cfg.frame == Frame::Absolute
                                 ? std::abs(row.truth) + std::abs(z0(j))
                                 : std::abs(z0(j));
        const double bound =
            rate_bound(q, k, cfg.graph.size(), cfg.f, T, c.beta, c.gamma, mp.lambdas(j)) +
            relative_slack * scale;
        ++out.points;
        const double ratio = bound > 0.0 ? row.abs_error / bound
                                         : (row.abs_error > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
        out.worst_ratio = std::max(out.worst_ratio, ratio);
        if (row.abs_error > bound) {
          if (out.violations == 0) {
            out.first_violation = "node " + one_based(i) + " mode " + one_based(j) + " k=" +
                                  std::to_string(k) + ": |e|=" + std::to_string(row.abs_error) +
                                  " > " + std::to_string(bound);
          }
          ++out.violations;
        }
      }
    }
  }
  return out;
}

double pbar(double p, int m, int f) {
  if (!(p >= 0.0 && p <= 1.0)) throw DomainError("p must lie in [0,1]");
  if (m < 3) throw DomainError("m >= 3 is required");
  if (f < 0) throw DomainError("f must be >= 0");
  const int links = (m - 1) * f + 1;
  const int needed = 2 * f + 1;
  double total = 0.0;
  double binom = 1.0;  // C(links, s)
  for (int s = 0; s < needed && s <= links; ++s) {
    total += binom * std::pow(1.0 - p, s) * std::pow(p, links - s);
    binom = binom * (links - s) / (s + 1);
  }
  return std::clamp(total, 0.0, 1.0);
}

bool mss_criterion(double rho, double pbar_value) {
  if (!(rho > 0.0)) throw DomainError("rho must be positive");
  if (!(pbar_value >= 0.0 && pbar_value <= 1.0)) throw DomainError("pbar must lie in [0,1]");
  return rho * rho * pbar_value < 1.0;
}

MarginTable sweep_mss_margin(double rho, int f, std::vector<int> ms, std::vector<double> ps) {
  if (!(rho > 0.0)) throw DomainError("rho must be positive");
  MarginTable t{rho, f, std::move(ms), std::move(ps), {}};
  for (double p : t.ps) {
    std::vector<double> row;
    for (int m : t.ms) row.push_back(rho * rho * pbar(p, m, f));
    t.values.push_back(std::move(row));
  }
  return t;
}

std::vector<double> probability_grid(double lo, double hi, double step) {
  if (!(step > 0.0)) throw DomainError("step must be positive");
  if (!(lo >= 0.0 && hi <= 1.0 && lo <= hi)) throw DomainError("grid must lie in [0,1]");
  const auto count = static_cast<long>(std::floor((hi - lo) / step + 1e-9)) + 1;
  std::vector<double> out;
  for (long i = 0; i < count; ++i) out.push_back(std::min(hi, lo + static_cast<double>(i) * step));
  return out;
}

double MssReport::mean(Step k, NodeId node) const {
  return mean_sq.at(static_cast<std::size_t>(k) * regular.size() + regular_index(regular, node));
}

double MssReport::half(Step k, NodeId node) const {
  return half_width.at(static_cast<std::size_t>(k) * regular.size() + regular_index(regular, node));
}

std::uint64_t trial_seed(std::uint64_t master, int trial) {
  std::seed_seq seq{static_cast<std::uint32_t>(master), static_cast<std::uint32_t>(master >> 32),
                    static_cast<std::uint32_t>(trial), 0x6d6f6e74U};
  std::uint32_t words[2];
  seq.generate(words, words + 2);
  return (static_cast<std::uint64_t>(words[0]) << 32) | words[1];
}

MssReport monte_carlo_mss(const SimConfig& cfg, int trials, unsigned threads) {
  if (cfg.protocol != ProtocolVariant::Lfse) {
    throw ConfigInvalid("mean-square analysis requires the LFSE protocol");
  }
  const auto* erasure = std::get_if<BernoulliErasureChannel>(&cfg.channel);
  if (erasure == nullptr) {
    throw ConfigInvalid("mean-square analysis requires Bernoulli erasure links");
  }
  if (!cfg.horizon) throw ConfigInvalid("mean-square analysis requires an explicit horizon");
  if (trials < 1) throw ConfigInvalid("trials must be >= 1");
  const Design design = prepare(cfg);

  MssReport rep;
  rep.scenario = cfg.name;
  rep.trials = trials;
  rep.horizon = *cfg.horizon;
  rep.seed = cfg.seed;
  rep.regular = design.regular.to_vector();
  rep.rho = design.modal.spectral_radius();
  rep.p = erasure->p;
  rep.pbar_value = pbar(rep.p, cfg.robustness_m, cfg.f);
  rep.margin = rep.rho * rep.rho * rep.pbar_value;
  rep.criterion = mss_criterion(rep.rho, rep.pbar_value);

  std::vector<std::vector<double>> sq(static_cast<std::size_t>(trials));
  std::atomic<int> next{0};
  auto worker = [&] {
    RunOptions opts;
    opts.record_modes = false;
    for (int t = next++; t < trials; t = next++) {
      Trace tr = run_simulation(cfg, design, trial_seed(cfg.seed, t), opts);
      for (double& e : tr.state_error) e *= e;
      sq[static_cast<std::size_t>(t)] = std::move(tr.state_error);
    }
  };
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, static_cast<unsigned>(trials));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < threads; ++w) pool.emplace_back(worker);
  }

  // Accumulate offsets from the first trial: exact when all trials agree.
  const std::size_t cells = sq.front().size();
  const std::vector<double>& base = sq.front();
  rep.mean_sq.assign(cells, 0.0);
  rep.half_width.assign(cells, 0.0);
  std::vector<double> shift(cells, 0.0);
  for (const auto& s : sq) {
    for (std::size_t c = 0; c < cells; ++c) shift[c] += s[c] - base[c];
  }
  for (std::size_t c = 0; c < cells; ++c) {
    shift[c] /= trials;
    rep.mean_sq[c] = base[c] + shift[c];
  }
  if (trials > 1) {
    for (std::size_t c = 0; c < cells; ++c) {
      double var = 0.0;
      for (const auto& s : sq) {
        const double d = (s[c] - base[c]) - shift[c];
        var += d * d;
      }
      var /= trials - 1;
      rep.half_width[c] = 1.96 * std::sqrt(var / trials);
    }
  }
  return rep;
}

}  // namespace resest
