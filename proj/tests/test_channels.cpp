#include <cmath>
#include <set>

#include <doctest.h>

#include "resest/channels.hpp"
#include "support.hpp"

using namespace resest;

namespace {

// Every window of T+1 consecutive steps must switch every MEDAG edge on.
bool windows_cover(const Channel& ch, const std::vector<Edge>& medag_edges, int T, Step horizon,
                   Channel& live) {
  std::vector<std::set<Edge>> up(static_cast<std::size_t>(horizon));
  for (Step k = 0; k < horizon; ++k) {
    for (const Edge& e : medag_edges) {
      if (live.transmit(e, k).delivered) up[static_cast<std::size_t>(k)].insert(e);
    }
  }
  (void)ch;
  for (Step k = 0; k + T < horizon; ++k) {
    std::set<Edge> u;
    for (Step s = k; s <= k + T; ++s) u.insert(up[static_cast<std::size_t>(s)].begin(), up[static_cast<std::size_t>(s)].end());
    if (u.size() != medag_edges.size()) return false;
  }
  return true;
}

}  // namespace

TEST_SUITE("channels") {
  TEST_CASE("parameter validation") {
    CHECK_THROWS_AS(validate(BernoulliErasureChannel{1.5}), DomainError);
    CHECK_THROWS_AS(validate(WindowedUnionChannel{-1, 0.5}), DomainError);
    CHECK_THROWS_AS(validate(ErasureWithDelayChannel{0.4, 0}), DomainError);
    CHECK_NOTHROW(validate(BoundedDelayChannel{3}));
  }

  TEST_CASE("ideal links deliver immediately and reject unknown links") {
    Channel ch(IdealChannel{}, Digraph::complete(3), 1);
    CHECK(ch.transmit({0, 1}, 4) == Delivery{true, 4, 4});
    Digraph g(3);
    g.add_edge(0, 1);
    Channel sparse(IdealChannel{}, g, 1);
    CHECK_THROWS_AS(sparse.transmit({1, 0}, 0), UnknownLink);
  }

  TEST_CASE("window schedule partitions MEDAG edges round robin") {
    const Digraph g = Digraph::complete(5);
    const Medag m = build_medag(g, NodeSet{0, 1, 2}, 1);
    CHECK(m.edges().size() == 6);

    std::mt19937_64 rng(1);
    const WindowSchedule zero = make_window_schedule(g, {m}, 0, rng);
    for (const Edge& e : m.edges()) CHECK(zero.medag_edge_active(e, 17));

    // 9 edges split 3/3/3 for T = 2
    const Digraph g6 = Digraph::complete(6);
    const Medag m6 = build_medag(g6, NodeSet{0, 1, 2}, 1);
    REQUIRE(m6.edges().size() == 9);
    const WindowSchedule two = make_window_schedule(g6, {m6}, 2, rng);
    std::vector<int> sizes(3, 0);
    for (const auto& [e, grp] : two.group) ++sizes[static_cast<std::size_t>(grp)];
    CHECK(sizes == std::vector<int>{3, 3, 3});
  }

  TEST_CASE("sampled windowed schedules keep the union property") {
    const Digraph g = Digraph::complete(7);
    const Medag m = build_medag(g, NodeSet{0, 1, 2}, 1);
    for (int T : {0, 1, 3}) {
      for (std::uint64_t seed : {1u, 2u, 3u}) {
        Channel ch(WindowedUnionChannel{T, 0.5}, g, seed, {m});
        CHECK(windows_cover(ch, m.edges(), T, 100, ch));
      }
    }
  }

  TEST_CASE("bounded delay stays inside the window") {
    Channel ch(BoundedDelayChannel{3}, Digraph::complete(3), 9);
    std::set<Step> delays;
    for (Step k = 0; k < 500; ++k) {
      const Delivery d = ch.transmit({0, 2}, k);
      CHECK(d.delivered);
      CHECK(d.sent == k);
      delays.insert(d.arrival - k);
    }
    CHECK(delays == std::set<Step>{0, 1, 2, 3});
  }

  TEST_CASE("erasure with delay substitutes an older packet") {
    Channel never(ErasureWithDelayChannel{0.0, 3}, Digraph::complete(2), 4);
    for (Step k = 0; k < 50; ++k) CHECK(never.transmit({0, 1}, k) == Delivery{true, k, k});

    Channel always(ErasureWithDelayChannel{1.0, 2}, Digraph::complete(2), 4);
    for (Step k = 0; k < 200; ++k) {
      const Delivery d = always.transmit({0, 1}, k);
      if (k < 1) {
        CHECK_FALSE(d.delivered);
        continue;
      }
      if (!d.delivered) {
        CHECK(k - 2 < 0);
        continue;
      }
      CHECK(d.arrival == k);
      CHECK(k - d.sent >= 1);
      CHECK(k - d.sent <= 2);
    }
  }

  TEST_CASE("Bernoulli drop rate matches p") {
    Channel ch(BernoulliErasureChannel{0.3}, Digraph::complete(2), 123);
    const int n = 100000;
    int drops = 0;
    for (Step k = 0; k < n; ++k) drops += ch.transmit({0, 1}, k).delivered ? 0 : 1;
    const double sigma = std::sqrt(0.3 * 0.7 / n);
    CHECK(std::abs(drops / static_cast<double>(n) - 0.3) < 3 * sigma);
  }

  TEST_CASE("link outcomes do not depend on query order or other links") {
    const Digraph g = Digraph::complete(4);
    Channel a(BernoulliErasureChannel{0.5}, g, 77);
    Channel b(BernoulliErasureChannel{0.5}, g, 77);
    std::vector<Delivery> seq_a, seq_b;
    for (Step k = 0; k < 40; ++k) {
      for (const Edge& e : g.edges()) seq_a.push_back(a.transmit(e, k));
    }
    // b skips steps on one link and queries the rest in reverse
    for (Step k = 0; k < 40; ++k) {
      auto edges = g.edges();
      std::reverse(edges.begin(), edges.end());
      for (const Edge& e : edges) {
        if (e == Edge{0, 1} && k % 3 != 0) continue;
        const Delivery d = b.transmit(e, k);
        seq_b.push_back(d);
      }
    }
    Channel c(BernoulliErasureChannel{0.5}, g, 77);
    std::size_t idx = 0;
    for (Step k = 0; k < 40; ++k) {
      for (const Edge& e : g.edges()) {
        const Delivery expect = seq_a[idx++];
        if (e == Edge{0, 1} && k % 3 != 0) continue;
        CHECK(c.transmit(e, k) == expect);
      }
    }
    CHECK_THROWS_AS(c.transmit({0, 1}, 3), DomainError);
  }
}
