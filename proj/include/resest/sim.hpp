#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "resest/adversary.hpp"
#include "resest/channels.hpp"
#include "resest/graph.hpp"
#include "resest/lti.hpp"
#include "resest/protocol.hpp"

namespace resest {

/// Absolute: nodes see the real plant. Deviation: nodes run on offsets from
/// the true trajectory (the plant is simulated from rest and initial
/// estimates are shifted by -z[0]). Every update rule is affine-equivariant,
/// so both frames produce the same errors in exact arithmetic; the deviation
/// frame avoids the cancellation floor eps * |z[k]| that grows with unstable
/// modes. Only the open-loop (LFSE) variant may use it, because the
/// sliding-window rule maps unheard neighbors to the absolute value 0.
enum class Frame { Absolute, Deviation };

struct AdversarySpec {
  NodeId node = 0;
  AdversaryStrategy strategy;
};

struct SimConfig {
  std::string name = "scenario";
  Plant plant;
  Digraph graph;
  int f = 0;
  std::vector<AdversarySpec> adversaries;
  ChannelSpec channel = IdealChannel{};
  ProtocolVariant protocol = ProtocolVariant::SwLfse;
  int robustness_m = 3;        // LFSE: MEDAG nodes need m*f+1 neighbors
  std::optional<Step> horizon; // unset: smallest K where the envelope is below tolerance
  Eigen::VectorXd x0;
  double gamma_local = 0.5;
  WeightRule weights = WeightRule::Uniform;
  Frame frame = Frame::Absolute;
  std::uint64_t seed = 0;
  int trials = 100;
  double value_cap = kDefaultValueCap;
  double tolerance = 1e-6;
};

/// Everything fixed at design time: modal form, one MEDAG per consensus mode
/// (an empty Medag for other modes), local observers.
struct Design {
  ModalPlant modal;
  std::vector<Medag> medags;
  std::vector<std::optional<ObserverGains>> observers;
  NodeSet adversaries;
  NodeSet regular;

  /// In-degree each MEDAG was built with: 2f+1, or mf+1 for LFSE.
  int redundancy = 1;
};

/// Validates the configuration and builds the design. Throws ConfigInvalid
/// naming the violated hypothesis.
Design prepare(const SimConfig& cfg);

struct TraceRow {
  Step k = 0;
  NodeId node = 0;
  int mode = 0;
  double estimate = 0.0;
  double truth = 0.0;
  double abs_error = 0.0;
};

struct Trace {
  std::string scenario;
  std::uint64_t seed = 0;
  Step horizon = 0;
  int modes = 0;
  std::vector<NodeId> regular;
  std::vector<TraceRow> rows;       // by k, then node, then mode
  std::vector<double> state_error;  // ||x_hat_i[k] - x[k]||, by k then regular node
  std::uint64_t channel_digest = 0;

  double state_error_at(Step k, NodeId node) const;
  double max_state_error(Step k) const;
  const TraceRow& row(Step k, NodeId node, int mode) const;
};

/// Snapshot handed to RunOptions::on_step after the nodes moved from step k
/// to k+1.
struct StepView {
  Step step = 0;
  const Design* design = nullptr;
  std::span<const RegularNode> nodes;  // in Trace::regular order
  const Eigen::VectorXd* truth = nullptr;  // z[k] in the node frame
};

struct RunOptions {
  bool record_modes = true;
  std::function<void(const StepView&)> on_step;
};

/// One synchronous run: plant steps, sensors measure, regular nodes and
/// adversaries emit, channels deliver, nodes update. Deterministic in
/// (cfg, seed).
Trace run_simulation(const SimConfig& cfg, const RunOptions& options = {});
Trace run_simulation(const SimConfig& cfg, const Design& design, std::uint64_t seed,
                     const RunOptions& options = {});

/// beta * [(N - (2f+1)) * (|lambda| / gamma)^(T+1)]^q * gamma^k. Throws
/// DomainError unless gamma lies in (0,1) and k >= (T+1) q.
double rate_bound(int q, Step k, int N, int f, int T, double beta, double gamma, double lambda);

inline constexpr double kGammaFloor = 1e-6;

struct ModeConstants {
  int mode = 0;
  double beta = 0.0;
  double gamma = 0.0;
};

/// For every consensus mode: gamma = largest observer contraction among the
/// regular sources (clamped to kGammaFloor), beta = largest envelope constant
/// of their initial mode errors.
std::vector<ModeConstants> derive_beta_gamma(const SimConfig& cfg, const Design& design);

/// Delay window T the envelope uses for this channel (0 for ideal links).
/// Throws DomainError for channels without a deterministic window.
int envelope_window(const ChannelSpec& channel);

/// Bound on |e_i^{(j)}[k]| for a regular node: the observer envelope on
/// detectable modes, the rate envelope at the node's MEDAG level on consensus
/// modes (infinite before it applies), |e_j[0]| |lambda_j|^k on open-loop modes.
double mode_error_bound(const SimConfig& cfg, const Design& design,
                        const std::vector<ModeConstants>& constants, NodeId node, int mode,
                        Step k);

/// Smallest K at which the bound on every regular node's full-state error,
/// ||V^{-1}|| * ||per-mode bounds||, drops below `tolerance`.
Step envelope_horizon(const SimConfig& cfg, const Design& design, double tolerance);

struct EnvelopeCheck {
  std::size_t points = 0;
  std::size_t violations = 0;
  double worst_ratio = 0.0;  // max |e| / (bound + slack)
  std::string first_violation;
  bool ok() const { return violations == 0; }
};

/// Compares every consensus-mode error of every regular non-source node
/// against the rate envelope for k >= (T+1) q. `relative_slack` adds
/// relative_slack * (|z_j[k]| + |z_j[0]|) to the bound to absorb rounding.
EnvelopeCheck check_envelope(const Trace& trace, const SimConfig& cfg, const Design& design,
                             double relative_slack);

/// Probability that fewer than 2f+1 of (m-1)f+1 independent links, each
/// erased with probability p, deliver. Throws DomainError unless p in [0,1],
/// m >= 3, f >= 0.
double pbar(double p, int m, int f);

/// rho^2 * pbar < 1. Throws DomainError unless rho > 0.
bool mss_criterion(double rho, double pbar_value);

struct MarginTable {
  double rho = 0.0;
  int f = 0;
  std::vector<int> ms;
  std::vector<double> ps;
  std::vector<std::vector<double>> values;  // [p index][m index] = rho^2 pbar
};

MarginTable sweep_mss_margin(double rho, int f, std::vector<int> ms, std::vector<double> ps);

/// Evenly spaced grid lo, lo+step, ..., hi (hi included up to rounding).
std::vector<double> probability_grid(double lo, double hi, double step);

struct MssReport {
  std::string scenario;
  int trials = 0;
  Step horizon = 0;
  std::uint64_t seed = 0;
  std::vector<NodeId> regular;
  std::vector<double> mean_sq;     // E||e_i[k]||^2, by k then regular node
  std::vector<double> half_width;  // 95% normal-approximation half width
  double rho = 0.0;
  double p = 0.0;
  double pbar_value = 0.0;
  double margin = 0.0;  // rho^2 pbar
  bool criterion = false;

  double mean(Step k, NodeId node) const;
  double half(Step k, NodeId node) const;
};

/// Seed of Monte Carlo trial t.
std::uint64_t trial_seed(std::uint64_t master, int trial);

/// Independent seeded LFSE runs over Bernoulli erasure links, reduced in trial
/// order. Throws ConfigInvalid for other protocol/channel combinations.
MssReport monte_carlo_mss(const SimConfig& cfg, int trials, unsigned threads = 0);

}  // namespace resest
