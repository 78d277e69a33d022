#pragma once

#include <cmath>

#include <Eigen/Dense>
#include <vector>

#include "resest/errors.hpp"
#include "resest/graph.hpp"

namespace resest {

/// x[k+1] = A x[k], y_i[k] = C_i x[k] for each of the N sensor nodes.
struct Plant {
  Eigen::MatrixXd A;
  std::vector<Eigen::MatrixXd> sensors;

  int states() const { return static_cast<int>(A.rows()); }
  int nodes() const { return static_cast<int>(sensors.size()); }
  /// Throws DimensionMismatch unless A is square, n >= 1, N >= 1 and every
  /// C_i has n columns.
  void validate() const;
};

struct ModalTolerances {
  double imaginary = 1e-9;    // |Im(lambda)| above this is non-real
  double gap = 1e-8;          // eigenvalues closer than this are repeated
  double column = 1e-12;      // transformed sensor columns at or below are zero
  double diagonal_rel = 1e-9; // off-diagonal residue relative to ||A||
};

/// The plant in eigen-coordinates z = V x, where V A V^{-1} = diag(lambdas).
/// Modes are ordered by descending |lambda|, ties by descending value.
struct ModalPlant {
  Eigen::VectorXd lambdas;
  Eigen::MatrixXd V;
  Eigen::MatrixXd V_inv;
  std::vector<Eigen::MatrixXd> cbar;        // C_i V^{-1}
  std::vector<std::vector<int>> detectable; // O_i, ascending mode indices
  std::vector<int> unstable;                // |lambda_j| >= 1
  std::vector<int> consensus;               // unstable modes some node cannot detect

  int modes() const { return static_cast<int>(lambdas.size()); }
  int nodes() const { return static_cast<int>(cbar.size()); }
  bool detects(NodeId i, int j) const;
  std::vector<int> undetectable(NodeId i) const;
  bool is_unstable(int j) const { return std::abs(lambdas(j)) >= 1.0; }
  double spectral_radius() const;
};

/// Throws NonRealSpectrum, RepeatedEigenvalue, or IllConditioned when the
/// eigenvector basis fails the diagonality check.
ModalPlant diagonalize(const Plant& plant, const ModalTolerances& tol = {});

/// Nodes whose measurements make mode j detectable.
NodeSet source_set(const ModalPlant& mp, int j);

/// Luenberger observer of node i for its detectable modes O_i.
///
/// When the transformed sensor block restricted to O_i has full column rank
/// every mode is reconstructed independently and each scalar error obeys
/// e[k+1] = gamma * e[k]. Otherwise a single output combination is used and
/// the poles gamma * (p - m) / p, m = 0..p-1, are assigned, so the spectral
/// radius is still gamma.
struct ObserverGains {
  NodeId node = 0;
  double gamma = 0.0;
  std::vector<int> modes;     // O_i
  Eigen::VectorXd lambdas;    // eigenvalues of the modes in O_i
  Eigen::MatrixXd C;          // cbar_i restricted to O_i columns
  Eigen::MatrixXd L;          // |O_i| x r_i gain
  Eigen::MatrixXd F;          // error dynamics diag(lambdas) - L C
  bool decoupled = false;
  Eigen::MatrixXd P;          // eigenvectors of F (gamma > 0)
  Eigen::MatrixXd P_inv;

  /// Position of mode j in `modes`; throws ModeNotDetectable.
  int slot(int j) const;
  /// Spectral radius of F.
  double contraction() const;
  /// Constants c_j with |e_j[k]| <= c_j * max(gamma, gamma_floor)^k for the
  /// given initial error over O_i.
  Eigen::VectorXd envelope_constants(const Eigen::VectorXd& initial_error,
                                     double gamma_floor) const;
};

/// Throws ModeNotDetectable if O_i is empty, DomainError if gamma is outside
/// [0, 1).
ObserverGains design_local_observer(const ModalPlant& mp, NodeId i, double gamma_local);

/// One Luenberger step. `estimates` holds all n mode estimates; entries
/// outside O_i are left untouched. Throws DimensionMismatch on a malformed y.
void observer_step(const ObserverGains& gains, Eigen::Ref<Eigen::VectorXd> estimates,
                   const Eigen::Ref<const Eigen::VectorXd>& y);

}  // namespace resest
