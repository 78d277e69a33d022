#include "resest/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace resest {

double rescale_delayed(double lambda, Step tau, double value) {
  if (tau < 0) throw DomainError("delay must be non-negative");
  double factor = 1.0;
  for (Step t = 0; t < tau; ++t) factor *= lambda;
  return factor * value;
}

double rescaled_value(const BufferSlot& slot, double lambda, Step step) {
  if (!slot.received || slot.timestamp_invalid) return 0.0;
  return rescale_delayed(lambda, step - slot.timestamp, slot.value);
}

NodeBuffer::NodeBuffer(const std::vector<NodeSet>& listen) {
  slots_.resize(listen.size());
  for (std::size_t j = 0; j < listen.size(); ++j) {
    for (NodeId l : listen[j]) slots_[j].push_back(BufferSlot{.neighbor = l});
  }
}

bool NodeBuffer::offer(const EstimateMsg& msg, Step step) {
  if (msg.mode < 0 || static_cast<std::size_t>(msg.mode) >= slots_.size()) return false;
  auto& row = slots_[static_cast<std::size_t>(msg.mode)];
  const auto it = std::find_if(row.begin(), row.end(),
                               [&](const BufferSlot& s) { return s.neighbor == msg.sender; });
  if (it == row.end()) return false;
  if (msg.timestamp_missing || msg.timestamp > step) {
    it->received = true;
    it->timestamp_invalid = true;
    return true;
  }
  if (msg.timestamp <= it->timestamp) return false;
  it->received = true;
  it->timestamp_invalid = false;
  it->value = msg.value;
  it->timestamp = msg.timestamp;
  return true;
}

std::span<const BufferSlot> NodeBuffer::slots(int mode) const {
  return slots_.at(static_cast<std::size_t>(mode));
}

TrimResult trim_extremes(std::vector<Valued> values, int f) {
  if (f < 0) throw DomainError("f must be non-negative");
  const auto need = static_cast<std::size_t>(2 * f + 1);
  if (values.size() < need) {
    throw TooFewValues("trimming " + std::to_string(f) + " values from each end needs " +
                       std::to_string(need) + " values, got " + std::to_string(values.size()));
  }
  std::sort(values.begin(), values.end(), [](const Valued& a, const Valued& b) {
    if (a.value != b.value) return a.value > b.value;
    return a.node < b.node;
  });
  const auto cut = static_cast<std::ptrdiff_t>(f);
  TrimResult out;
  out.discarded_high.assign(values.begin(), values.begin() + cut);
  out.kept.assign(values.begin() + cut, values.end() - cut);
  out.discarded_low.assign(values.end() - cut, values.end());
  std::reverse(out.discarded_low.begin(), out.discarded_low.end());
  return out;
}

std::vector<double> consensus_weights(std::span<const Valued> kept, WeightRule rule) {
  const std::size_t n = kept.size();
  if (n == 0) throw TooFewValues("no values left to combine");
  if (rule == WeightRule::Uniform) return std::vector<double>(n, 1.0 / static_cast<double>(n));
  // `kept` comes out of trim_extremes already sorted, so the middle is positional.
  std::vector<double> w(n, 0.0);
  if (n % 2 == 1) {
    w[n / 2] = 1.0;
  } else {
    w[n / 2 - 1] = 0.5;
    w[n / 2] = 0.5;
  }
  return w;
}

double weighted_update(double lambda, std::span<const Valued> kept, WeightRule rule) {
  const std::vector<double> w = consensus_weights(kept, rule);
  double sum = 0.0;
  for (std::size_t l = 0; l < kept.size(); ++l) sum += w[l] * kept[l].value;
  return lambda * sum;
}

double swlfse_update(double lambda, std::span<const BufferSlot> slots, Step step, int f,
                     WeightRule rule) {
  std::vector<Valued> values;
  values.reserve(slots.size());
  for (const BufferSlot& s : slots) values.push_back({s.neighbor, rescaled_value(s, lambda, step)});
  const TrimResult t = trim_extremes(std::move(values), f);
  return weighted_update(lambda, t.kept, rule);
}

double lfse_update(double lambda, std::span<const Valued> received, int f, double current,
                   WeightRule rule) {
  if (received.size() < static_cast<std::size_t>(2 * f + 1)) return lambda * current;
  const TrimResult t = trim_extremes({received.begin(), received.end()}, f);
  return weighted_update(lambda, t.kept, rule);
}

RegularNode::RegularNode(NodeId id, const ModalPlant& mp, std::optional<ObserverGains> observer,
                         std::vector<NodeSet> listen, int f, ProtocolVariant variant,
                         WeightRule weights, Eigen::VectorXd initial)
    : id_(id),
      lambdas_(mp.lambdas),
      observer_(std::move(observer)),
      listen_(std::move(listen)),
      f_(f),
      variant_(variant),
      weights_(weights),
      estimates_(std::move(initial)) {
  const auto n = static_cast<std::size_t>(mp.modes());
  if (static_cast<std::size_t>(estimates_.size()) != n) {
    throw DimensionMismatch("initial estimate of node " + std::to_string(id + 1) +
                            " must cover every mode");
  }
  listen_.resize(n);
  rules_.resize(n);
  records_.resize(n);
  inbox_.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    const int mode = static_cast<int>(j);
    if (mp.detects(id, mode)) {
      if (!observer_) throw ConfigInvalid("node detects modes but has no observer");
      rules_[j] = ModeRule::Observer;
    } else if (mp.is_unstable(mode)) {
      rules_[j] = ModeRule::Consensus;
      if (listen_[j].size() < 2 * f + 1) {
        throw ConfigInvalid("node " + std::to_string(id + 1) + " listens to " +
                            std::to_string(listen_[j].size()) + " neighbors for mode " +
                            std::to_string(j + 1) + ", needs at least " +
                            std::to_string(2 * f + 1));
      }
    } else {
      rules_[j] = ModeRule::OpenLoop;
    }
    if (rules_[j] != ModeRule::Consensus) listen_[j] = NodeSet{};
  }
  buffer_ = NodeBuffer(listen_);
}

std::vector<EstimateMsg> RegularNode::emit(Step step) const {
  std::vector<EstimateMsg> out;
  out.reserve(static_cast<std::size_t>(estimates_.size()));
  for (Eigen::Index j = 0; j < estimates_.size(); ++j) {
    out.push_back({.sender = id_, .mode = static_cast<int>(j), .value = estimates_(j),
                   .timestamp = step});
  }
  return out;
}

void RegularNode::receive(const EstimateMsg& msg, Step step) {
  if (msg.mode < 0 || msg.mode >= static_cast<int>(rules_.size())) return;
  const auto j = static_cast<std::size_t>(msg.mode);
  if (rules_[j] != ModeRule::Consensus || !listen_[j].contains(msg.sender)) return;
  if (variant_ == ProtocolVariant::SwLfse) {
    buffer_.offer(msg, step);
    return;
  }
  auto& box = inbox_[j];
  const auto it = std::find_if(box.begin(), box.end(),
                               [&](const Valued& v) { return v.node == msg.sender; });
  if (it != box.end()) {
    it->value = msg.value;
  } else {
    box.push_back({msg.sender, msg.value});
  }
}

void RegularNode::update(Step step, const Eigen::Ref<const Eigen::VectorXd>& y) {
  Eigen::VectorXd next = estimates_;
  if (observer_) observer_step(*observer_, next, y);
  for (std::size_t j = 0; j < rules_.size(); ++j) {
    const double lambda = lambdas_(static_cast<Eigen::Index>(j));
    const double current = estimates_(static_cast<Eigen::Index>(j));
    double& out = next(static_cast<Eigen::Index>(j));
    switch (rules_[j]) {
      case ModeRule::Observer:
        break;
      case ModeRule::OpenLoop:
        out = lambda * current;
        break;
      case ModeRule::Consensus: {
        ConsensusRecord& rec = records_[j];
        rec.inputs.clear();
        if (variant_ == ProtocolVariant::SwLfse) {
          for (const BufferSlot& s : buffer_.slots(static_cast<int>(j))) {
            rec.inputs.push_back({s.neighbor, rescaled_value(s, lambda, step)});
          }
        } else {
          rec.inputs = inbox_[j];
          inbox_[j].clear();
        }
        rec.open_loop = rec.inputs.size() < static_cast<std::size_t>(2 * f_ + 1);
        if (rec.open_loop) {
          rec.trimmed = {};
          out = lambda * current;
        } else {
          rec.trimmed = trim_extremes(rec.inputs, f_);
          out = weighted_update(lambda, rec.trimmed.kept, weights_);
        }
        rec.result = out;
        break;
      }
    }
  }
  estimates_ = std::move(next);
}

}  // namespace resest
