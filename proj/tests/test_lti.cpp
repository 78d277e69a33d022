#include <cmath>

#include <doctest.h>

#include "resest/lti.hpp"
#include "support.hpp"

using namespace resest;
using resest::testing::scalar;

namespace {

Plant plant_of(Eigen::MatrixXd A, std::vector<Eigen::MatrixXd> C) {
  Plant p;
  p.A = std::move(A);
  p.sensors = std::move(C);
  return p;
}

double offdiag_max(const Eigen::MatrixXd& M) {
  double m = 0.0;
  for (Eigen::Index r = 0; r < M.rows(); ++r) {
    for (Eigen::Index c = 0; c < M.cols(); ++c) {
      if (r != c) m = std::max(m, std::abs(M(r, c)));
    }
  }
  return m;
}

}  // namespace

TEST_SUITE("lti_core") {
  TEST_CASE("already diagonal plant") {
    Eigen::MatrixXd A(2, 2);
    A << 2, 0, 0, 0.5;
    Eigen::MatrixXd C(1, 2);
    C << 1, 0;
    const ModalPlant mp = diagonalize(plant_of(A, {C}));
    CHECK(mp.lambdas(0) == doctest::Approx(2.0));
    CHECK(mp.lambdas(1) == doctest::Approx(0.5));
    CHECK(std::abs(mp.V(0, 1)) < 1e-12);
    CHECK(std::abs(mp.V(1, 0)) < 1e-12);
    CHECK(mp.detectable[0] == std::vector<int>{0});
    CHECK(mp.unstable == std::vector<int>{0});
  }

  TEST_CASE("companion matrix with roots 0.8 and 0.6") {
    Eigen::MatrixXd A(2, 2);
    A << 0, 1, -0.48, 1.4;
    const ModalPlant mp = diagonalize(plant_of(A, {Eigen::MatrixXd::Identity(2, 2)}));
    // roots of s^2 - 1.4 s + 0.48 = (s - 0.8)(s - 0.6)
    CHECK(mp.lambdas(0) == doctest::Approx(0.8).epsilon(1e-12));
    CHECK(mp.lambdas(1) == doctest::Approx(0.6).epsilon(1e-12));
    const Eigen::MatrixXd M = mp.V * A * mp.V_inv;
    CHECK(offdiag_max(M) < 1e-12);
    CHECK((mp.V_inv * mp.lambdas.asDiagonal() * mp.V - A).norm() < 1e-12);
    CHECK(mp.unstable.empty());
  }

  TEST_CASE("spectral errors") {
    Eigen::MatrixXd rot(2, 2);
    rot << 0, -1, 1, 0;
    CHECK_THROWS_AS(diagonalize(plant_of(rot, {Eigen::MatrixXd::Identity(2, 2)})),
                    NonRealSpectrum);
    Eigen::MatrixXd jordan(2, 2);
    jordan << 1, 1, 0, 1;
    CHECK_THROWS_AS(diagonalize(plant_of(jordan, {Eigen::MatrixXd::Identity(2, 2)})), Error);
    Eigen::MatrixXd rep(2, 2);
    rep << 2, 0, 0, 2;
    CHECK_THROWS_AS(diagonalize(plant_of(rep, {Eigen::MatrixXd::Identity(2, 2)})),
                    RepeatedEigenvalue);
    CHECK_THROWS_AS(plant_of(Eigen::MatrixXd(2, 3), {}).validate(), DimensionMismatch);
  }

  TEST_CASE("source sets") {
    const ModalPlant mp = diagonalize(testing::scalar_plant(1.1, 5, NodeSet{0, 1, 2}));
    CHECK(source_set(mp, 0) == NodeSet{0, 1, 2});
    CHECK(mp.consensus == std::vector<int>{0});

    const ModalPlant none = diagonalize(testing::scalar_plant(1.1, 3, NodeSet{}));
    CHECK(source_set(none, 0).empty());

    // 5 nodes, column j nonzero iff i <= 2
    Eigen::MatrixXd A(2, 2);
    A << 3, 0, 0, 1.5;
    std::vector<Eigen::MatrixXd> C;
    for (int i = 0; i < 5; ++i) {
      Eigen::MatrixXd c(1, 2);
      c << (i < 2 ? 1.0 : 0.0), 1.0;
      C.push_back(c);
    }
    const ModalPlant mp2 = diagonalize(plant_of(A, C));
    CHECK(source_set(mp2, 0) == NodeSet{0, 1});
    CHECK(source_set(mp2, 1) == NodeSet::first(5));
  }

  TEST_CASE("scalar observer gains") {
    const ModalPlant mp = diagonalize(testing::scalar_plant(2.0, 1, NodeSet{0}));
    const ObserverGains dead = design_local_observer(mp, 0, 0.0);
    CHECK(dead.L(0, 0) == doctest::Approx(2.0));
    const ObserverGains half = design_local_observer(mp, 0, 0.5);
    CHECK(half.L(0, 0) == doctest::Approx(1.5));
    CHECK(half.contraction() == doctest::Approx(0.5));
    CHECK_THROWS_AS(design_local_observer(mp, 0, 1.0), DomainError);

    const ModalPlant blind = diagonalize(testing::scalar_plant(2.0, 2, NodeSet{0}));
    CHECK_THROWS_AS(design_local_observer(blind, 1, 0.5), ModeNotDetectable);
    CHECK_THROWS_AS(half.slot(3), ModeNotDetectable);
  }

  TEST_CASE("observer error recursion") {
    const ModalPlant mp = diagonalize(testing::scalar_plant(2.0, 1, NodeSet{0}));
    const ObserverGains g = design_local_observer(mp, 0, 0.5);
    const double c = mp.cbar[0](0, 0);
    double z = 1.0;
    Eigen::VectorXd est = Eigen::VectorXd::Constant(1, z + 4.0);
    for (int k = 1; k <= 10; ++k) {
      observer_step(g, est, Eigen::VectorXd::Constant(1, c * z));
      z *= 2.0;
      CHECK(std::abs(est(0) - z) == doctest::Approx(4.0 * std::pow(0.5, k)).epsilon(1e-9));
    }

    Eigen::VectorXd exact = Eigen::VectorXd::Constant(1, 1.0);
    observer_step(g, exact, Eigen::VectorXd::Constant(1, c * 1.0));
    CHECK(exact(0) == doctest::Approx(2.0));

    const ObserverGains dead = design_local_observer(mp, 0, 0.0);
    Eigen::VectorXd far = Eigen::VectorXd::Constant(1, 123.0);
    observer_step(dead, far, Eigen::VectorXd::Constant(1, c * 3.0));
    CHECK(far(0) == doctest::Approx(6.0));

    CHECK_THROWS_AS(observer_step(g, est, Eigen::VectorXd::Zero(2)), DimensionMismatch);
  }

  TEST_CASE("coupled observer: one output sees two modes") {
    Eigen::MatrixXd A(2, 2);
    A << 1.2, 0, 0, 0.9;
    Eigen::MatrixXd C(1, 2);
    C << 1, 1;
    const ModalPlant mp = diagonalize(plant_of(A, {C}));
    const ObserverGains g = design_local_observer(mp, 0, 0.5);
    CHECK_FALSE(g.decoupled);
    CHECK(g.contraction() == doctest::Approx(0.5).epsilon(1e-9));

    // The envelope constants bound the actual error for many steps.
    Eigen::VectorXd z(2);
    z << 1.0, -2.0;
    Eigen::VectorXd est = Eigen::VectorXd::Zero(2);
    const Eigen::VectorXd e0 = est - z;
    const Eigen::VectorXd c = g.envelope_constants(e0, 1e-6);
    for (int k = 1; k <= 40; ++k) {
      observer_step(g, est, mp.cbar[0] * z);
      z = mp.lambdas.cwiseProduct(z);
      for (int j = 0; j < 2; ++j) {
        CHECK(std::abs(est(j) - z(j)) <= c(j) * std::pow(0.5, k) * (1 + 1e-9) + 1e-12);
      }
    }
  }

  TEST_CASE("modal invariants on random diagonalizable plants") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    for (int t = 0; t < 100; ++t) {
      const int n = 1 + t % 4;
      Eigen::VectorXd lam(n);
      for (int j = 0; j < n; ++j) lam(j) = 0.3 * (j + 1) + 0.05 * u(rng) + (t % 2 ? 0.5 : 0.0);
      Eigen::MatrixXd W(n, n);
      for (auto& v : W.reshaped()) v = u(rng);
      W += 3.0 * Eigen::MatrixXd::Identity(n, n);
      const Eigen::MatrixXd A = W * lam.asDiagonal() * W.inverse();
      const ModalPlant mp = diagonalize(plant_of(A, {Eigen::MatrixXd::Identity(n, n)}));
      const Eigen::MatrixXd M = mp.V * A * mp.V_inv;
      CHECK(offdiag_max(M) <= 1e-9 * A.norm());
      CHECK((mp.V_inv * mp.lambdas.asDiagonal() * mp.V - A).norm() <= 1e-9 * A.norm());
      for (int j = 1; j < n; ++j) CHECK(std::abs(mp.lambdas(j - 1)) >= std::abs(mp.lambdas(j)));
    }
  }
}
