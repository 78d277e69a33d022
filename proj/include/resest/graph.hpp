#pragma once

#include <bit>
#include <compare>
#include <cstdint>
#include <initializer_list>
#include <iosfwd>
#include <iterator>
#include <span>
#include <string>
#include <vector>

#include "resest/errors.hpp"

namespace resest {

/// Zero-based node index. Files and the CLI use 1-based ids; conversion
/// happens at the I/O boundary only.
using NodeId = int;

/// Graphs are desk-scale: node sets are single 64-bit masks.
inline constexpr int kMaxNodes = 64;

class NodeSet {
 public:
  class iterator {
   public:
    using iterator_category = std::forward_iterator_tag;
    using value_type = NodeId;
    using difference_type = std::ptrdiff_t;
    using pointer = void;
    using reference = NodeId;

    iterator() = default;
    explicit iterator(std::uint64_t rest) : rest_(rest) {}
    NodeId operator*() const { return std::countr_zero(rest_); }
    iterator& operator++() {
      rest_ &= rest_ - 1;
      return *this;
    }
    iterator operator++(int) {
      iterator old = *this;
      ++*this;
      return old;
    }
    bool operator==(const iterator&) const = default;

   private:
    std::uint64_t rest_ = 0;
  };

  constexpr NodeSet() = default;
  NodeSet(std::initializer_list<NodeId> ids);
  explicit NodeSet(std::span<const NodeId> ids);

  static constexpr NodeSet from_bits(std::uint64_t bits) {
    NodeSet s;
    s.bits_ = bits;
    return s;
  }
  /// {0, ..., n-1}
  static NodeSet first(int n);

  constexpr std::uint64_t bits() const { return bits_; }
  bool contains(NodeId i) const {
    return i >= 0 && i < kMaxNodes && ((bits_ >> i) & 1U) != 0;
  }
  void insert(NodeId i);
  void erase(NodeId i);
  int size() const { return std::popcount(bits_); }
  bool empty() const { return bits_ == 0; }

  iterator begin() const { return iterator(bits_); }
  iterator end() const { return iterator(0); }
  std::vector<NodeId> to_vector() const;

  friend NodeSet operator|(NodeSet a, NodeSet b) { return from_bits(a.bits_ | b.bits_); }
  friend NodeSet operator&(NodeSet a, NodeSet b) { return from_bits(a.bits_ & b.bits_); }
  friend NodeSet operator-(NodeSet a, NodeSet b) { return from_bits(a.bits_ & ~b.bits_); }
  NodeSet& operator|=(NodeSet o) {
    bits_ |= o.bits_;
    return *this;
  }
  bool is_subset_of(NodeSet o) const { return (bits_ & ~o.bits_) == 0; }
  friend bool operator==(NodeSet, NodeSet) = default;

 private:
  std::uint64_t bits_ = 0;
};

/// "{1,2,3}" using 1-based ids.
std::string to_string(NodeSet s);

struct Edge {
  NodeId from = 0;
  NodeId to = 0;
  auto operator<=>(const Edge&) const = default;
};

/// Directed graph. Edge (j, i) means j can transmit to i; the neighborhood of
/// i is its in-neighbor set.
class Digraph {
 public:
  Digraph() = default;
  explicit Digraph(int n);
  Digraph(int n, std::span<const Edge> edges);

  static Digraph complete(int n);

  /// Throws InvalidGraph on self-loops or out-of-range endpoints.
  void add_edge(NodeId from, NodeId to);

  int size() const { return static_cast<int>(in_.size()); }
  NodeSet nodes() const { return NodeSet::first(size()); }
  NodeSet in_neighbors(NodeId i) const { return in_.at(static_cast<std::size_t>(i)); }
  NodeSet out_neighbors(NodeId i) const;
  bool has_edge(NodeId from, NodeId to) const { return in_neighbors(to).contains(from); }
  std::size_t edge_count() const;
  /// Sorted by (from, to).
  std::vector<Edge> edges() const;

  friend bool operator==(const Digraph&, const Digraph&) = default;

 private:
  std::vector<NodeSet> in_;
};

/// Edge-list text: one "j i" pair per line (1-based), '#' starts a comment.
/// The node count is the largest id seen unless `nodes` is positive.
Digraph parse_edge_list(std::istream& in, int nodes = 0);
void write_edge_list(std::ostream& out, const Digraph& g);

/// True iff some member of `set` has at least r in-neighbors outside `set`.
bool is_r_reachable(const Digraph& g, NodeSet set, int r);

/// Synchronized peeling from a source set: level 0 is the source set, and
/// level m+1 collects every unassigned node with at least r in-neighbors in
/// levels 0..m. Stops when a round assigns nothing.
struct PeelResult {
  std::vector<NodeSet> levels;
  NodeSet residual;
  bool complete() const { return residual.empty(); }
};
PeelResult peel(const Digraph& g, NodeSet sources, int r);

/// Every nonempty subset of V \ sources is r-reachable. Decided by peeling.
bool is_strongly_r_robust(const Digraph& g, NodeSet sources, int r);

inline constexpr int kBruteForceLimit = 20;

/// Enumerates every nonempty C in V \ sources. Throws TooLarge when
/// |V \ sources| exceeds kBruteForceLimit.
bool brute_force_strongly_r_robust(const Digraph& g, NodeSet sources, int r);

/// Per-mode estimation DAG. Sources sit at level 0; every other node listens
/// only to `neighbors[i]`, all of which sit at strictly lower levels.
struct Medag {
  int mode = 0;
  std::vector<int> level;
  std::vector<NodeSet> neighbors;
  int depth = 0;

  int size() const { return static_cast<int>(level.size()); }
  NodeSet level_set(int m) const;
  NodeSet sources() const { return level_set(0); }
  /// Edges (l, i) with l in neighbors[i], sorted.
  std::vector<Edge> edges() const;
};

class NotRobust : public Error {
 public:
  NotRobust(const std::string& what, NodeSet residual)
      : Error(what), residual_(residual) {}
  NodeSet residual() const { return residual_; }

 private:
  NodeSet residual_;
};

/// Peels with r = 2f+1. Throws NotRobust carrying the stuck residual set.
Medag build_medag(const Digraph& g, NodeSet sources, int f, int mode = 0);

/// Same construction with an explicit in-degree requirement r (e.g. mf+1).
Medag build_medag_with_redundancy(const Digraph& g, NodeSet sources, int r, int mode = 0);

struct MedagCheck {
  bool ok = true;
  std::string diagnostic;
  explicit operator bool() const { return ok; }
};

/// Checks the MEDAG properties against the regular set V \ adversaries:
/// at least 2f+1 listened-to neighbors for every regular non-source node,
/// regular level-0 nodes are exactly the regular sources, and regular
/// neighbors of a level-m regular node sit in levels 0..m-1. Also checks that
/// the MEDAG is a subgraph of g.
MedagCheck verify_medag(const Digraph& g, const Medag& m, NodeSet sources, int f,
                        NodeSet adversaries);

}  // namespace resest
