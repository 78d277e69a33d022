#include "resest/adversary.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace resest {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

EstimateMsg stamped(NodeId sender, int mode, double value, Step step) {
  return {.sender = sender, .mode = mode, .value = value, .timestamp = step};
}

// Highest and lowest regular estimate among the neighbors `receiver` listens
// to, rescaled as if fresh. Falls back to the truth when there are none.
std::pair<double, double> regular_range(const AdversaryContext& ctx, NodeId receiver, int mode) {
  double hi = -std::numeric_limits<double>::infinity();
  double lo = std::numeric_limits<double>::infinity();
  for (NodeId l : ctx.listens(receiver, mode) & ctx.regular()) {
    const double v = ctx.estimate(l, mode);
    hi = std::max(hi, v);
    lo = std::min(lo, v);
  }
  if (hi < lo) hi = lo = ctx.true_mode(mode);
  return {hi, lo};
}

}  // namespace

double AdversaryContext::estimate(NodeId node, int mode) const {
  return (*estimates).at(static_cast<std::size_t>(node))(mode);
}

NodeSet AdversaryContext::listens(NodeId receiver, int mode) const {
  if (medags == nullptr || static_cast<std::size_t>(mode) >= medags->size()) return {};
  const Medag& m = (*medags)[static_cast<std::size_t>(mode)];
  if (m.size() == 0) return {};
  return m.neighbors.at(static_cast<std::size_t>(receiver));
}

std::string strategy_name(const AdversaryStrategy& s) {
  return std::visit(overloaded{
                        [](const Silent&) { return std::string("silent"); },
                        [](const ConstantSpoof&) { return std::string("constant_spoof"); },
                        [](const RandomNoise&) { return std::string("random_noise"); },
                        [](const FalseTimestamp&) { return std::string("false_timestamp"); },
                        [](const CollusiveExtremes&) { return std::string("collusive_extremes"); },
                        [](const ScriptedHook&) { return std::string("scripted_hook"); },
                    },
                    s);
}

bool f_local_check(const Digraph& g, NodeSet adversaries, int f) {
  for (NodeId i : g.nodes() - adversaries) {
    if ((g.in_neighbors(i) & adversaries).size() > f) return false;
  }
  return true;
}

std::vector<Packet> adversary_emit(const AdversaryStrategy& strategy, const AdversaryContext& ctx,
                                   NodeId sender, std::mt19937_64& rng, double value_cap) {
  const int modes = ctx.plant->modes();
  const Step k = ctx.step;
  std::vector<Packet> out;
  if (std::holds_alternative<Silent>(strategy)) return out;

  for (NodeId receiver : ctx.graph->out_neighbors(sender)) {
    Packet packet{receiver, {}};
    std::visit(
        overloaded{
            [](const Silent&) {},
            [&](const ConstantSpoof& s) {
              for (int j = 0; j < modes; ++j) {
                const double value = std::pow(ctx.plant->lambdas(j), static_cast<double>(k)) * s.initial;
                packet.messages.push_back(stamped(sender, j, value, k));
              }
            },
            [&](const RandomNoise& s) {
              std::uniform_real_distribution<double> noise(-s.magnitude, s.magnitude);
              for (int j = 0; j < modes; ++j) {
                packet.messages.push_back(stamped(sender, j, ctx.true_mode(j) + noise(rng), k));
              }
            },
            [&](const FalseTimestamp& s) {
              for (int j = 0; j < modes; ++j) {
                EstimateMsg msg = stamped(sender, j, ctx.true_mode(j), std::max<Step>(0, k + s.offset));
                msg.timestamp_missing = s.omit;
                packet.messages.push_back(msg);
              }
            },
            [&](const CollusiveExtremes& s) {
              const bool high = s.direction == ExtremeDirection::High ||
                                (s.direction == ExtremeDirection::Alternate && receiver % 2 == 0);
              for (int j = 0; j < modes; ++j) {
                const auto [hi, lo] = regular_range(ctx, receiver, j);
                packet.messages.push_back(
                    stamped(sender, j, high ? hi + s.margin : lo - s.margin, k));
              }
            },
            [&](const ScriptedHook& s) {
              if (!s.emit) return;
              packet.messages = s.emit(ctx, sender, receiver, rng);
              for (auto& m : packet.messages) m.sender = sender;
            },
        },
        strategy);
    for (auto& m : packet.messages) {
      if (std::isnan(m.value)) m.value = 0.0;
      m.value = std::clamp(m.value, -value_cap, value_cap);
    }
    if (!packet.messages.empty()) out.push_back(std::move(packet));
  }
  return out;
}

}  // namespace resest
