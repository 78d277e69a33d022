#pragma once

#include <cstdint>
#include <map>
#include <random>
#include <variant>
#include <vector>

#include "resest/graph.hpp"
#include "resest/protocol.hpp"

namespace resest {

/// Every message arrives in the step it was sent.
struct IdealChannel {};

/// Deterministic losses whose union over any T+1 consecutive steps still
/// contains every MEDAG edge. Non-MEDAG edges are up with probability
/// `baseline_activity` in each step.
struct WindowedUnionChannel {
  int T = 1;
  double baseline_activity = 0.5;
};

/// Delay drawn uniformly from 0..T for every message.
struct BoundedDelayChannel {
  int T = 1;
};

/// Each packet is dropped with probability p, independently per link and step.
struct BernoulliErasureChannel {
  double p = 0.0;
};

/// With probability 1-e the receiver gets this step's packet, otherwise the
/// packet sent tau steps earlier, tau uniform on 1..T.
struct ErasureWithDelayChannel {
  double e = 0.0;
  int T = 1;
};

using ChannelSpec = std::variant<IdealChannel, WindowedUnionChannel, BoundedDelayChannel,
                                 BernoulliErasureChannel, ErasureWithDelayChannel>;

/// Throws DomainError on out-of-range parameters.
void validate(const ChannelSpec& spec);

/// Outcome of offering a link's step-k packet to the channel. For a delivered
/// packet, `sent` is the step whose packet the receiver gets and `arrival`
/// the step in which it gets it.
struct Delivery {
  bool delivered = false;
  Step sent = 0;
  Step arrival = 0;
  friend bool operator==(const Delivery&, const Delivery&) = default;
};

/// Partition of the MEDAG edges into T+1 groups; group k mod (T+1) is up at
/// step k, so every window of T+1 steps covers all of them.
struct WindowSchedule {
  int T = 0;
  std::map<Edge, int> group;

  bool is_medag_edge(Edge e) const { return group.contains(e); }
  bool medag_edge_active(Edge e, Step k) const;
};

WindowSchedule make_window_schedule(const Digraph& g, const std::vector<Medag>& medags, int T,
                                    std::mt19937_64& rng);

/// Samples the loss process of every link. Each link owns an rng stream seeded
/// from (seed, from, to), and consumes a fixed number of draws per step, so the
/// outcome for (link, step) does not depend on which other links exist or the
/// order in which links are queried. Steps must be queried in non-decreasing
/// order per link.
class Channel {
 public:
  Channel(ChannelSpec spec, const Digraph& g, std::uint64_t seed,
          const std::vector<Medag>& medags = {});

  const ChannelSpec& spec() const { return spec_; }
  const WindowSchedule& schedule() const { return schedule_; }

  /// Throws UnknownLink if the link is not a baseline edge.
  Delivery transmit(Edge link, Step step);

  /// Largest delay a delivered packet can have, 0 for delay-free channels.
  int max_delay() const;

 private:
  struct LinkStream {
    std::mt19937_64 rng;
    Step next_step = 0;
    Step cached_step = -1;
    Delivery cached;
  };
  static constexpr int kDrawsPerStep = 3;

  ChannelSpec spec_;
  Digraph graph_;
  std::uint64_t seed_;
  WindowSchedule schedule_;
  std::map<Edge, LinkStream> links_;
};

}  // namespace resest
