#include "resest/lti.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include <Eigen/Eigenvalues>

namespace resest {

void Plant::validate() const {
  if (A.rows() < 1 || A.rows() != A.cols()) {
    throw DimensionMismatch("A must be a nonempty square matrix, got " +
                            std::to_string(A.rows()) + "x" + std::to_string(A.cols()));
  }
  if (sensors.empty()) throw DimensionMismatch("plant needs at least one sensor node");
  for (std::size_t i = 0; i < sensors.size(); ++i) {
    if (sensors[i].cols() != A.cols()) {
      throw DimensionMismatch("C_" + std::to_string(i + 1) + " has " +
                              std::to_string(sensors[i].cols()) + " columns, expected " +
                              std::to_string(A.cols()));
    }
  }
}

bool ModalPlant::detects(NodeId i, int j) const {
  const auto& o = detectable.at(static_cast<std::size_t>(i));
  return std::binary_search(o.begin(), o.end(), j);
}

std::vector<int> ModalPlant::undetectable(NodeId i) const {
  std::vector<int> out;
  for (int j = 0; j < modes(); ++j) {
    if (!detects(i, j)) out.push_back(j);
  }
  return out;
}

double ModalPlant::spectral_radius() const { return lambdas.cwiseAbs().maxCoeff(); }

ModalPlant diagonalize(const Plant& plant, const ModalTolerances& tol) {
  plant.validate();
  const Eigen::MatrixXd& A = plant.A;
  const Eigen::Index n = A.rows();

  Eigen::EigenSolver<Eigen::MatrixXd> es(A, true);
  if (es.info() != Eigen::Success) throw IllConditioned("eigen-solver did not converge");
  for (Eigen::Index j = 0; j < n; ++j) {
    if (std::abs(es.eigenvalues()(j).imag()) > tol.imaginary) {
      throw NonRealSpectrum("eigenvalue " + std::to_string(es.eigenvalues()(j).real()) + "+" +
                            std::to_string(es.eigenvalues()(j).imag()) + "i is not real");
    }
  }

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  const Eigen::VectorXd raw = es.eigenvalues().real();
  std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    if (std::abs(raw(a)) != std::abs(raw(b))) return std::abs(raw(a)) > std::abs(raw(b));
    return raw(a) > raw(b);
  });

  ModalPlant mp;
  mp.lambdas.resize(n);
  Eigen::MatrixXd W(n, n);  // columns are right eigenvectors
  for (Eigen::Index c = 0; c < n; ++c) {
    const Eigen::Index src = order[static_cast<std::size_t>(c)];
    mp.lambdas(c) = raw(src);
    Eigen::VectorXd v = es.eigenvectors().col(src).real();
    v.normalize();
    Eigen::Index pivot = 0;
    v.cwiseAbs().maxCoeff(&pivot);
    if (v(pivot) < 0) v = -v;
    W.col(c) = v;
  }

  for (Eigen::Index a = 0; a < n; ++a) {
    for (Eigen::Index b = a + 1; b < n; ++b) {
      if (std::abs(mp.lambdas(a) - mp.lambdas(b)) <= tol.gap) {
        throw RepeatedEigenvalue("eigenvalues " + std::to_string(mp.lambdas(a)) + " and " +
                                 std::to_string(mp.lambdas(b)) + " are not distinct");
      }
    }
  }

  Eigen::FullPivLU<Eigen::MatrixXd> lu(W);
  if (!lu.isInvertible()) throw IllConditioned("eigenvector basis is singular");
  mp.V_inv = W;
  mp.V = lu.inverse();

  const double scale = A.norm();
  const double limit = tol.diagonal_rel * scale;
  Eigen::MatrixXd M = mp.V * A * mp.V_inv;
  Eigen::MatrixXd off = M;
  off.diagonal().setZero();
  const Eigen::MatrixXd recon = mp.V_inv * mp.lambdas.asDiagonal() * mp.V;
  if (off.cwiseAbs().maxCoeff() > limit || (recon - A).norm() > limit) {
    throw IllConditioned("modal transform fails the diagonality check (off-diagonal " +
                         std::to_string(off.cwiseAbs().maxCoeff()) + ")");
  }

  const auto N = static_cast<std::size_t>(plant.nodes());
  mp.cbar.resize(N);
  mp.detectable.resize(N);
  for (std::size_t i = 0; i < N; ++i) {
    mp.cbar[i] = plant.sensors[i] * mp.V_inv;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (mp.cbar[i].rows() > 0 && mp.cbar[i].col(j).norm() > tol.column) {
        mp.detectable[i].push_back(static_cast<int>(j));
      }
    }
  }
  for (int j = 0; j < static_cast<int>(n); ++j) {
    if (!mp.is_unstable(j)) continue;
    mp.unstable.push_back(j);
    if (source_set(mp, j).size() < mp.nodes()) mp.consensus.push_back(j);
  }
  return mp;
}

NodeSet source_set(const ModalPlant& mp, int j) {
  NodeSet s;
  for (NodeId i = 0; i < mp.nodes(); ++i) {
    if (mp.detects(i, j)) s.insert(i);
  }
  return s;
}

int ObserverGains::slot(int j) const {
  const auto it = std::find(modes.begin(), modes.end(), j);
  if (it == modes.end()) {
    throw ModeNotDetectable("mode " + std::to_string(j + 1) + " is not detectable by node " +
                            std::to_string(node + 1));
  }
  return static_cast<int>(it - modes.begin());
}

double ObserverGains::contraction() const {
  if (F.size() == 0) return 0.0;
  return F.eigenvalues().cwiseAbs().maxCoeff();
}

Eigen::VectorXd ObserverGains::envelope_constants(const Eigen::VectorXd& initial_error,
                                                  double gamma_floor) const {
  const Eigen::Index p = static_cast<Eigen::Index>(modes.size());
  if (initial_error.size() != p) throw DimensionMismatch("initial error must cover O_i");
  if (decoupled) return initial_error.cwiseAbs();
  if (gamma > 0.0) {
    // |e_j[k]| = |sum_m P_jm mu_m^k (P^{-1} e0)_m| <= gamma^k sum_m |P_jm| |(P^{-1} e0)_m|
    return P.cwiseAbs() * (P_inv * initial_error).cwiseAbs();
  }
  // Nilpotent error dynamics: zero after p steps, so bound the transient
  // against the floor rate directly.
  Eigen::VectorXd c = initial_error.cwiseAbs();
  Eigen::VectorXd e = initial_error;
  double scale = 1.0;
  for (Eigen::Index k = 1; k < p; ++k) {
    e = F * e;
    scale *= gamma_floor;
    c = c.cwiseMax(e.cwiseAbs() / scale);
  }
  return c;
}

ObserverGains design_local_observer(const ModalPlant& mp, NodeId i, double gamma_local) {
  if (!(gamma_local >= 0.0 && gamma_local < 1.0)) {
    throw DomainError("observer contraction must lie in [0,1), got " +
                      std::to_string(gamma_local));
  }
  if (i < 0 || i >= mp.nodes()) throw DomainError("node out of range");
  ObserverGains g;
  g.node = i;
  g.gamma = gamma_local;
  g.modes = mp.detectable[static_cast<std::size_t>(i)];
  if (g.modes.empty()) {
    throw ModeNotDetectable("node " + std::to_string(i + 1) + " detects no modes");
  }
  const auto p = static_cast<Eigen::Index>(g.modes.size());
  const Eigen::MatrixXd& cbar = mp.cbar[static_cast<std::size_t>(i)];
  g.lambdas.resize(p);
  g.C.resize(cbar.rows(), p);
  for (Eigen::Index m = 0; m < p; ++m) {
    g.lambdas(m) = mp.lambdas(g.modes[static_cast<std::size_t>(m)]);
    g.C.col(m) = cbar.col(g.modes[static_cast<std::size_t>(m)]);
  }
  const Eigen::MatrixXd shifted =
      (g.lambdas.array() - gamma_local).matrix().asDiagonal().toDenseMatrix();

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(g.C);
  if (qr.rank() == p) {
    // Left inverse of C: every mode is read out on its own.
    const Eigen::MatrixXd left_inv =
        (g.C.transpose() * g.C).ldlt().solve(g.C.transpose());
    g.L = shifted * left_inv;
    g.decoupled = true;
  } else {
    // Collapse the outputs to one row whose entries are all nonzero, then
    // place distinct poles on the diagonal single-output pair.
    Eigen::RowVectorXd h(g.C.rows());
    Eigen::RowVectorXd c;
    for (int t = 1;; ++t) {
      for (Eigen::Index r = 0; r < h.size(); ++r) h(r) = std::pow(static_cast<double>(t), r);
      c = h * g.C;
      if (c.cwiseAbs().minCoeff() > 1e-9 * c.cwiseAbs().maxCoeff()) break;
      if (t > 64) throw IllConditioned("no output combination separates the detectable modes");
    }
    Eigen::VectorXd poles(p);
    for (Eigen::Index m = 0; m < p; ++m) {
      poles(m) = gamma_local * static_cast<double>(p - m) / static_cast<double>(p);
    }
    Eigen::VectorXd ell(p);
    for (Eigen::Index j = 0; j < p; ++j) {
      double num = 1.0;
      double den = c(j);
      for (Eigen::Index m = 0; m < p; ++m) {
        num *= g.lambdas(j) - poles(m);
        if (m != j) den *= g.lambdas(j) - g.lambdas(m);
      }
      ell(j) = num / den;
    }
    g.L = ell * h;
  }
  g.F = g.lambdas.asDiagonal().toDenseMatrix() - g.L * g.C;
  if (g.decoupled) {
    g.P = Eigen::MatrixXd::Identity(p, p);
    g.P_inv = g.P;
  } else if (gamma_local > 0.0) {
    Eigen::EigenSolver<Eigen::MatrixXd> es(g.F, true);
    g.P = es.eigenvectors().real();
    g.P_inv = g.P.inverse();
  }
  return g;
}

void observer_step(const ObserverGains& gains, Eigen::Ref<Eigen::VectorXd> estimates,
                   const Eigen::Ref<const Eigen::VectorXd>& y) {
  if (y.size() != gains.C.rows()) {
    throw DimensionMismatch("measurement of node " + std::to_string(gains.node + 1) + " has " +
                            std::to_string(y.size()) + " entries, expected " +
                            std::to_string(gains.C.rows()));
  }
  const auto p = static_cast<Eigen::Index>(gains.modes.size());
  Eigen::VectorXd local(p);
  for (Eigen::Index m = 0; m < p; ++m) {
    const int j = gains.modes[static_cast<std::size_t>(m)];
    if (j >= estimates.size()) throw DimensionMismatch("estimate vector too short");
    local(m) = estimates(j);
  }
  const Eigen::VectorXd next =
      gains.lambdas.cwiseProduct(local) + gains.L * (y - gains.C * local);
  for (Eigen::Index m = 0; m < p; ++m) estimates(gains.modes[static_cast<std::size_t>(m)]) = next(m);
}

}  // namespace resest
