#include "resest/channels.hpp"

#include <algorithm>
#include <set>
#include <string>

namespace resest {

namespace {

double unit(std::uint64_t raw) { return static_cast<double>(raw >> 11) * 0x1.0p-53; }

// Uniform integer in [lo, hi] from one raw draw.
Step pick(std::uint64_t raw, Step lo, Step hi) {
  const auto span = static_cast<double>(hi - lo + 1);
  const auto offset = static_cast<Step>(unit(raw) * span);
  return lo + std::min(offset, hi - lo);
}

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

}  // namespace

void validate(const ChannelSpec& spec) {
  std::visit(overloaded{
                 [](const IdealChannel&) {},
                 [](const WindowedUnionChannel& c) {
                   if (c.T < 0) throw DomainError("window length T must be >= 0");
                   if (c.baseline_activity < 0.0 || c.baseline_activity > 1.0) {
                     throw DomainError("baseline activity must lie in [0,1]");
                   }
                 },
                 [](const BoundedDelayChannel& c) {
                   if (c.T < 0) throw DomainError("delay bound T must be >= 0");
                 },
                 [](const BernoulliErasureChannel& c) {
                   if (!(c.p >= 0.0 && c.p <= 1.0)) throw DomainError("erasure p must lie in [0,1]");
                 },
                 [](const ErasureWithDelayChannel& c) {
                   if (!(c.e >= 0.0 && c.e <= 1.0)) throw DomainError("erasure e must lie in [0,1]");
                   if (c.T < 1) throw DomainError("delay bound T must be >= 1");
                 },
             },
             spec);
}

bool WindowSchedule::medag_edge_active(Edge e, Step k) const {
  const auto it = group.find(e);
  return it != group.end() && k % (T + 1) == it->second;
}

WindowSchedule make_window_schedule(const Digraph& g, const std::vector<Medag>& medags, int T,
                                    std::mt19937_64& rng) {
  if (T < 0) throw DomainError("window length T must be >= 0");
  std::set<Edge> unique;
  for (const Medag& m : medags) {
    for (const Edge& e : m.edges()) {
      if (!g.has_edge(e.from, e.to)) {
        throw InvalidGraph("MEDAG edge (" + std::to_string(e.from + 1) + "," +
                           std::to_string(e.to + 1) + ") is not in the graph");
      }
      unique.insert(e);
    }
  }
  std::vector<Edge> edges(unique.begin(), unique.end());
  std::shuffle(edges.begin(), edges.end(), rng);
  WindowSchedule s;
  s.T = T;
  for (std::size_t idx = 0; idx < edges.size(); ++idx) {
    s.group[edges[idx]] = static_cast<int>(idx % static_cast<std::size_t>(T + 1));
  }
  return s;
}

Channel::Channel(ChannelSpec spec, const Digraph& g, std::uint64_t seed,
                 const std::vector<Medag>& medags)
    : spec_(spec), graph_(g), seed_(seed) {
  validate(spec_);
  if (const auto* w = std::get_if<WindowedUnionChannel>(&spec_)) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      0x77696e64U};
    std::mt19937_64 rng(seq);
    schedule_ = make_window_schedule(g, medags, w->T, rng);
  }
}

int Channel::max_delay() const {
  return std::visit(overloaded{
                        [](const BoundedDelayChannel& c) { return c.T; },
                        [](const ErasureWithDelayChannel& c) { return c.T; },
                        [](const auto&) { return 0; },
                    },
                    spec_);
}

Delivery Channel::transmit(Edge link, Step step) {
  if (link.from < 0 || link.to < 0 || link.from >= graph_.size() || link.to >= graph_.size() ||
      !graph_.has_edge(link.from, link.to)) {
    throw UnknownLink("link (" + std::to_string(link.from + 1) + "," +
                      std::to_string(link.to + 1) + ") is not in the baseline graph");
  }
  if (step < 0) throw DomainError("step must be non-negative");
  auto it = links_.find(link);
  if (it == links_.end()) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed_), static_cast<std::uint32_t>(seed_ >> 32),
                      static_cast<std::uint32_t>(link.from), static_cast<std::uint32_t>(link.to)};
    it = links_.emplace(link, LinkStream{std::mt19937_64(seq), 0, -1, Delivery{}}).first;
  }
  LinkStream& ls = it->second;
  if (step == ls.cached_step) return ls.cached;
  if (step < ls.next_step) throw DomainError("link streams cannot be rewound");
  ls.rng.discard(static_cast<unsigned long long>((step - ls.next_step) * kDrawsPerStep));
  std::uint64_t draw[kDrawsPerStep];
  for (auto& d : draw) d = ls.rng();
  ls.next_step = step + 1;

  const Delivery now{true, step, step};
  const Delivery dropped{};
  const Delivery out = std::visit(
      overloaded{
          [&](const IdealChannel&) { return now; },
          [&](const WindowedUnionChannel& c) {
            const bool up = schedule_.is_medag_edge(link)
                                ? schedule_.medag_edge_active(link, step)
                                : unit(draw[0]) < c.baseline_activity;
            return up ? now : dropped;
          },
          [&](const BoundedDelayChannel& c) {
            return Delivery{true, step, step + pick(draw[1], 0, c.T)};
          },
          [&](const BernoulliErasureChannel& c) { return unit(draw[0]) < c.p ? dropped : now; },
          [&](const ErasureWithDelayChannel& c) {
            if (unit(draw[0]) >= c.e) return now;
            const Step sent = step - pick(draw[1], 1, c.T);
            return sent < 0 ? dropped : Delivery{true, sent, step};
          },
      },
      spec_);
  ls.cached_step = step;
  ls.cached = out;
  return out;
}

}  // namespace resest
