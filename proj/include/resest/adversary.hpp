#pragma once

#include <functional>
#include <random>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "resest/channels.hpp"
#include "resest/graph.hpp"
#include "resest/lti.hpp"
#include "resest/protocol.hpp"

namespace resest {

/// Read-only view of the whole simulation at one step, as seen by an
/// omniscient adversary. Values are in the frame the protocol runs in.
struct AdversaryContext {
  Step step = 0;
  const ModalPlant* plant = nullptr;
  const Digraph* graph = nullptr;
  const std::vector<Medag>* medags = nullptr;          // indexed by mode, empty if unused
  const Eigen::VectorXd* truth = nullptr;              // z[k]
  const std::vector<Eigen::VectorXd>* estimates = nullptr;  // per node; regular entries valid
  NodeSet adversaries;
  std::function<Delivery(Edge)> channel;  // this step's realization per link

  NodeSet regular() const { return graph->nodes() - adversaries; }
  double estimate(NodeId node, int mode) const;
  double true_mode(int mode) const { return (*truth)(mode); }
  /// MEDAG neighbors `receiver` listens to for `mode` (empty if none).
  NodeSet listens(NodeId receiver, int mode) const;
};

/// Never transmits.
struct Silent {};

/// A self-consistent fake trajectory lambda_j^k * initial for every mode.
struct ConstantSpoof {
  double initial = 1.0;
};

/// The true mode value plus uniform noise in [-magnitude, magnitude], drawn
/// independently per receiver.
struct RandomNoise {
  double magnitude = 1.0;
};

/// Sends the current true value under a forged stamp step + offset, or with
/// no stamp at all.
struct FalseTimestamp {
  Step offset = -3;
  bool omit = false;
};

enum class ExtremeDirection { High, Low, Alternate };

/// All adversaries push each receiver toward the same side: `margin` beyond
/// the largest (or smallest) regular estimate that receiver listens to.
/// Alternate picks the side by receiver parity. A zero margin sits exactly on
/// the regular extreme.
struct CollusiveExtremes {
  ExtremeDirection direction = ExtremeDirection::Alternate;
  double margin = 1.0;
};

/// User-supplied behavior: messages for one receiver.
struct ScriptedHook {
  std::function<std::vector<EstimateMsg>(const AdversaryContext&, NodeId sender,
                                         NodeId receiver, std::mt19937_64& rng)>
      emit;
};

using AdversaryStrategy =
    std::variant<Silent, ConstantSpoof, RandomNoise, FalseTimestamp, CollusiveExtremes,
                 ScriptedHook>;

std::string strategy_name(const AdversaryStrategy& s);

/// Every regular node has at most f adversarial in-neighbors.
bool f_local_check(const Digraph& g, NodeSet adversaries, int f);

struct Packet {
  NodeId receiver = 0;
  std::vector<EstimateMsg> messages;
};

inline constexpr double kDefaultValueCap = 1e12;

/// Packets from one adversarial sender to its out-neighbors at ctx.step.
/// Values are clamped to [-value_cap, value_cap].
std::vector<Packet> adversary_emit(const AdversaryStrategy& strategy, const AdversaryContext& ctx,
                                   NodeId sender, std::mt19937_64& rng,
                                   double value_cap = kDefaultValueCap);

}  // namespace resest
