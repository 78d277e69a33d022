#pragma once

#include <vector>

#include <Eigen/Dense>

#include "resest/graph.hpp"
#include "resest/lti.hpp"
#include "resest/sim.hpp"

namespace resest::testing {

inline Eigen::MatrixXd scalar(double v) { return Eigen::MatrixXd::Constant(1, 1, v); }

/// Scalar plant x[k+1] = lambda x[k]; nodes in `sensing` measure y = x.
inline Plant scalar_plant(double lambda, int nodes, NodeSet sensing) {
  Plant p;
  p.A = scalar(lambda);
  for (NodeId i = 0; i < nodes; ++i) {
    p.sensors.push_back(sensing.contains(i) ? scalar(1.0) : Eigen::MatrixXd(0, 1));
  }
  return p;
}

/// (n+2)-clique whose last two nodes are the sources.
inline Digraph example1_graph(int n) { return Digraph::complete(n + 2); }

inline NodeSet example1_sources(int n) { return NodeSet{n, n + 1}; }

/// The 5-clique scenario: S = {1,2,3}, f = 1, lambda = 1.1, silent node 4.
inline SimConfig clique5_config() {
  SimConfig cfg;
  cfg.name = "clique5";
  cfg.plant = scalar_plant(1.1, 5, NodeSet::first(3));
  cfg.graph = Digraph::complete(5);
  cfg.f = 1;
  cfg.adversaries = {{3, Silent{}}};
  cfg.x0 = Eigen::VectorXd::Constant(1, 1.0);
  return cfg;
}

/// LFSE scenario: 7-clique plus node 8 fed by 1, 5, 6, 7; sources {1,2,3,4};
/// silent node 1; Bernoulli(p) links, m = 3.
inline SimConfig mss_config(double p = 0.1) {
  SimConfig cfg;
  cfg.name = "mss";
  cfg.plant = scalar_plant(1.1, 8, NodeSet::first(4));
  cfg.graph = Digraph(8);
  for (NodeId a = 0; a < 7; ++a) {
    for (NodeId b = 0; b < 7; ++b) {
      if (a != b) cfg.graph.add_edge(a, b);
    }
  }
  for (NodeId a : {0, 4, 5, 6}) cfg.graph.add_edge(a, 7);
  cfg.f = 1;
  cfg.adversaries = {{0, Silent{}}};
  cfg.channel = BernoulliErasureChannel{p};
  cfg.protocol = ProtocolVariant::Lfse;
  cfg.robustness_m = 3;
  cfg.frame = Frame::Deviation;
  cfg.horizon = 300;
  cfg.x0 = Eigen::VectorXd::Constant(1, 1.0);
  return cfg;
}

}  // namespace resest::testing
