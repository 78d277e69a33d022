#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "resest/graph.hpp"
#include "resest/lti.hpp"

namespace resest {

using Step = std::int64_t;

/// A time-stamped estimate of one mode. Regular senders always stamp the
/// step at which the estimate was formed.
struct EstimateMsg {
  NodeId sender = 0;
  int mode = 0;
  double value = 0.0;
  Step timestamp = 0;
  bool timestamp_missing = false;
};

/// Latest estimate held for one listened-to neighbor.
struct BufferSlot {
  NodeId neighbor = 0;
  bool received = false;          // false: nothing heard yet
  bool timestamp_invalid = false; // last message had no usable stamp
  double value = 0.0;
  Step timestamp = -1;
};

/// lambda^tau * value
double rescale_delayed(double lambda, Step tau, double value);

/// The rescaled value a slot contributes at `step`. Slots that never heard
/// anything or whose last message had no usable stamp contribute 0.
double rescaled_value(const BufferSlot& slot, double lambda, Step step);

/// Per-mode store of the most recent estimate from each listened-to neighbor.
class NodeBuffer {
 public:
  NodeBuffer() = default;
  /// listen[j] is the neighbor set used for mode j (empty if unused).
  explicit NodeBuffer(const std::vector<NodeSet>& listen);

  /// Stores `msg` if it comes from a listened-to neighbor and is strictly
  /// newer than what is held. A missing stamp, or one from the future,
  /// marks the slot invalid without touching the stored stamp.
  bool offer(const EstimateMsg& msg, Step step);

  std::span<const BufferSlot> slots(int mode) const;

 private:
  std::vector<std::vector<BufferSlot>> slots_;
};

struct Valued {
  NodeId node = 0;
  double value = 0.0;
  friend bool operator==(const Valued&, const Valued&) = default;
};

struct TrimResult {
  std::vector<Valued> kept;            // descending by value
  std::vector<Valued> discarded_high;  // the f largest
  std::vector<Valued> discarded_low;   // the f smallest
};

/// Sorts descending (ties by ascending node id) and drops f values at each
/// end. Throws TooFewValues when fewer than 2f+1 values are given.
TrimResult trim_extremes(std::vector<Valued> values, int f);

enum class WeightRule { Uniform, Median };

/// Non-negative weights over `kept` that sum to one. Median weighting puts
/// all mass on the middle value, or half on each of the two middle values.
std::vector<double> consensus_weights(std::span<const Valued> kept, WeightRule rule);

/// lambda * sum_l w_l * kept_l
double weighted_update(double lambda, std::span<const Valued> kept, WeightRule rule);

/// Sliding-window update from buffered (possibly delayed) neighbor estimates.
double swlfse_update(double lambda, std::span<const BufferSlot> slots, Step step, int f,
                     WeightRule rule);

/// Trimmed update when at least 2f+1 estimates arrived this step, otherwise
/// lambda * current.
double lfse_update(double lambda, std::span<const Valued> received, int f, double current,
                   WeightRule rule);

enum class ProtocolVariant { SwLfse, Lfse };

enum class ModeRule { Observer, Consensus, OpenLoop };

/// Inputs and outcome of one consensus update, kept for inspection.
struct ConsensusRecord {
  bool open_loop = false;
  std::vector<Valued> inputs;  // rescaled values offered to the trimming step
  TrimResult trimmed;
  double result = 0.0;
};

/// State machine of a regular node: local observer for detectable modes,
/// trimmed consensus for undetectable unstable modes, open loop for
/// undetectable stable modes.
class RegularNode {
 public:
  /// listen[j] must hold at least 2f+1 neighbors for every consensus mode j.
  RegularNode(NodeId id, const ModalPlant& mp, std::optional<ObserverGains> observer,
              std::vector<NodeSet> listen, int f, ProtocolVariant variant, WeightRule weights,
              Eigen::VectorXd initial);

  NodeId id() const { return id_; }
  const Eigen::VectorXd& estimates() const { return estimates_; }
  ModeRule rule(int j) const { return rules_.at(static_cast<std::size_t>(j)); }
  NodeSet listens_to(int j) const { return listen_.at(static_cast<std::size_t>(j)); }

  /// Current estimates of every mode, stamped with `step`.
  std::vector<EstimateMsg> emit(Step step) const;

  /// Accepts a message delivered at `step`.
  void receive(const EstimateMsg& msg, Step step);

  /// Advances all mode estimates from step to step+1 using the node's
  /// measurement at `step` and everything received so far.
  void update(Step step, const Eigen::Ref<const Eigen::VectorXd>& y);

  const ConsensusRecord& last_consensus(int j) const {
    return records_.at(static_cast<std::size_t>(j));
  }
  const NodeBuffer& buffer() const { return buffer_; }

 private:
  NodeId id_;
  Eigen::VectorXd lambdas_;
  std::optional<ObserverGains> observer_;
  std::vector<NodeSet> listen_;
  std::vector<ModeRule> rules_;
  int f_;
  ProtocolVariant variant_;
  WeightRule weights_;
  Eigen::VectorXd estimates_;
  NodeBuffer buffer_;
  std::vector<std::vector<Valued>> inbox_;  // LFSE: this step's arrivals
  std::vector<ConsensusRecord> records_;
};

}  // namespace resest
