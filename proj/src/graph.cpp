#include "resest/graph.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <sstream>

namespace resest {

namespace {

void check_id(NodeId i) {
  if (i < 0 || i >= kMaxNodes) {
    throw InvalidGraph("node id " + std::to_string(i + 1) + " outside 1.." +
                       std::to_string(kMaxNodes));
  }
}

}  // namespace

NodeSet::NodeSet(std::initializer_list<NodeId> ids) {
  for (NodeId i : ids) insert(i);
}

NodeSet::NodeSet(std::span<const NodeId> ids) {
  for (NodeId i : ids) insert(i);
}

NodeSet NodeSet::first(int n) {
  if (n < 0 || n > kMaxNodes) throw InvalidGraph("node count out of range");
  return from_bits(n == kMaxNodes ? ~std::uint64_t{0} : ((std::uint64_t{1} << n) - 1));
}

void NodeSet::insert(NodeId i) {
  check_id(i);
  bits_ |= std::uint64_t{1} << i;
}

void NodeSet::erase(NodeId i) {
  check_id(i);
  bits_ &= ~(std::uint64_t{1} << i);
}

std::vector<NodeId> NodeSet::to_vector() const { return {begin(), end()}; }

std::string to_string(NodeSet s) {
  std::string out = "{";
  bool first = true;
  for (NodeId i : s) {
    if (!first) out += ",";
    out += std::to_string(i + 1);
    first = false;
  }
  return out + "}";
}

Digraph::Digraph(int n) {
  if (n < 0 || n > kMaxNodes) {
    throw InvalidGraph("graph size " + std::to_string(n) + " outside 0.." +
                       std::to_string(kMaxNodes));
  }
  in_.assign(static_cast<std::size_t>(n), NodeSet{});
}

Digraph::Digraph(int n, std::span<const Edge> edges) : Digraph(n) {
  for (const Edge& e : edges) add_edge(e.from, e.to);
}

Digraph Digraph::complete(int n) {
  Digraph g(n);
  const NodeSet all = g.nodes();
  for (NodeId i = 0; i < n; ++i) {
    NodeSet others = all;
    others.erase(i);
    g.in_[static_cast<std::size_t>(i)] = others;
  }
  return g;
}

void Digraph::add_edge(NodeId from, NodeId to) {
  if (from < 0 || from >= size() || to < 0 || to >= size()) {
    throw InvalidGraph("edge (" + std::to_string(from + 1) + "," + std::to_string(to + 1) +
                       ") has an endpoint outside 1.." + std::to_string(size()));
  }
  if (from == to) throw InvalidGraph("self-loop at node " + std::to_string(from + 1));
  in_[static_cast<std::size_t>(to)].insert(from);
}

NodeSet Digraph::out_neighbors(NodeId i) const {
  NodeSet out;
  for (NodeId to = 0; to < size(); ++to) {
    if (in_[static_cast<std::size_t>(to)].contains(i)) out.insert(to);
  }
  return out;
}

std::size_t Digraph::edge_count() const {
  std::size_t count = 0;
  for (NodeSet s : in_) count += static_cast<std::size_t>(s.size());
  return count;
}

std::vector<Edge> Digraph::edges() const {
  std::vector<Edge> out;
  out.reserve(edge_count());
  for (NodeId to = 0; to < size(); ++to) {
    for (NodeId from : in_[static_cast<std::size_t>(to)]) out.push_back({from, to});
  }
  std::sort(out.begin(), out.end());
  return out;
}

Digraph parse_edge_list(std::istream& in, int nodes) {
  std::vector<Edge> edges;
  int max_id = 0;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream fields(line);
    long long from = 0;
    long long to = 0;
    if (!(fields >> from)) {
      fields.clear();
      std::string rest;
      if (fields >> rest) {
        throw ParseError("line " + std::to_string(line_no) + ": expected \"j i\"");
      }
      continue;  // blank or comment-only
    }
    std::string extra;
    if (!(fields >> to) || (fields >> extra)) {
      throw ParseError("line " + std::to_string(line_no) + ": expected exactly two node ids");
    }
    if (from < 1 || to < 1 || from > kMaxNodes || to > kMaxNodes) {
      throw ParseError("line " + std::to_string(line_no) + ": node ids must lie in 1.." +
                       std::to_string(kMaxNodes));
    }
    if (from == to) throw ParseError("line " + std::to_string(line_no) + ": self-loop");
    max_id = std::max({max_id, static_cast<int>(from), static_cast<int>(to)});
    edges.push_back({static_cast<NodeId>(from - 1), static_cast<NodeId>(to - 1)});
  }
  const int n = nodes > 0 ? nodes : max_id;
  if (max_id > n) {
    throw ParseError("edge list mentions node " + std::to_string(max_id) + " but graph has " +
                     std::to_string(n) + " nodes");
  }
  return Digraph(n, edges);
}

void write_edge_list(std::ostream& out, const Digraph& g) {
  out << "# " << g.size() << " nodes, " << g.edge_count() << " directed edges (j i)\n";
  for (const Edge& e : g.edges()) out << e.from + 1 << ' ' << e.to + 1 << '\n';
}

bool is_r_reachable(const Digraph& g, NodeSet set, int r) {
  if (set.empty()) throw EmptySet("r-reachability is undefined for the empty set");
  if (r < 1) throw DomainError("r must be positive");
  for (NodeId i : set) {
    if ((g.in_neighbors(i) - set).size() >= r) return true;
  }
  return false;
}

PeelResult peel(const Digraph& g, NodeSet sources, int r) {
  if (r < 1) throw DomainError("r must be positive");
  PeelResult result;
  NodeSet assigned = sources & g.nodes();
  NodeSet remaining = g.nodes() - assigned;
  result.levels.push_back(assigned);
  while (!remaining.empty()) {
    NodeSet next;
    for (NodeId i : remaining) {
      if ((g.in_neighbors(i) & assigned).size() >= r) next.insert(i);
    }
    if (next.empty()) break;
    result.levels.push_back(next);
    assigned |= next;
    remaining = remaining - next;
  }
  result.residual = remaining;
  return result;
}

bool is_strongly_r_robust(const Digraph& g, NodeSet sources, int r) {
  return peel(g, sources, r).complete();
}

bool brute_force_strongly_r_robust(const Digraph& g, NodeSet sources, int r) {
  if (r < 1) throw DomainError("r must be positive");
  const std::vector<NodeId> others = (g.nodes() - sources).to_vector();
  if (others.size() > static_cast<std::size_t>(kBruteForceLimit)) {
    throw TooLarge("brute force limited to " + std::to_string(kBruteForceLimit) +
                   " non-source nodes, got " + std::to_string(others.size()));
  }
  const std::uint32_t subsets = std::uint32_t{1} << others.size();
  for (std::uint32_t pick = 1; pick < subsets; ++pick) {
    NodeSet c;
    for (std::size_t b = 0; b < others.size(); ++b) {
      if ((pick >> b) & 1U) c.insert(others[b]);
    }
    if (!is_r_reachable(g, c, r)) return false;
  }
  return true;
}

NodeSet Medag::level_set(int m) const {
  NodeSet s;
  for (NodeId i = 0; i < size(); ++i) {
    if (level[static_cast<std::size_t>(i)] == m) s.insert(i);
  }
  return s;
}

std::vector<Edge> Medag::edges() const {
  std::vector<Edge> out;
  for (NodeId i = 0; i < size(); ++i) {
    for (NodeId l : neighbors[static_cast<std::size_t>(i)]) out.push_back({l, i});
  }
  std::sort(out.begin(), out.end());
  return out;
}

Medag build_medag_with_redundancy(const Digraph& g, NodeSet sources, int r, int mode) {
  if (sources.empty()) throw EmptySet("MEDAG construction needs a nonempty source set");
  const PeelResult peeled = peel(g, sources, r);
  if (!peeled.complete()) {
    throw NotRobust("graph is not strongly " + std::to_string(r) + "-robust w.r.t. sources " +
                        to_string(sources) + "; nodes " + to_string(peeled.residual) +
                        " lack " + std::to_string(r) + " in-neighbors closer to the sources",
                    peeled.residual);
  }
  Medag m;
  m.mode = mode;
  m.level.assign(static_cast<std::size_t>(g.size()), 0);
  m.neighbors.assign(static_cast<std::size_t>(g.size()), NodeSet{});
  m.depth = static_cast<int>(peeled.levels.size()) - 1;
  NodeSet lower;
  for (int lvl = 0; lvl <= m.depth; ++lvl) {
    const NodeSet members = peeled.levels[static_cast<std::size_t>(lvl)];
    for (NodeId i : members) {
      m.level[static_cast<std::size_t>(i)] = lvl;
      if (lvl > 0) m.neighbors[static_cast<std::size_t>(i)] = g.in_neighbors(i) & lower;
    }
    lower |= members;
  }
  return m;
}

Medag build_medag(const Digraph& g, NodeSet sources, int f, int mode) {
  if (f < 0) throw DomainError("f must be non-negative");
  return build_medag_with_redundancy(g, sources, 2 * f + 1, mode);
}

MedagCheck verify_medag(const Digraph& g, const Medag& m, NodeSet sources, int f,
                        NodeSet adversaries) {
  auto fail = [](std::string why) { return MedagCheck{false, std::move(why)}; };
  if (m.size() != g.size() || m.neighbors.size() != m.level.size()) {
    return fail("MEDAG size does not match the graph");
  }
  const NodeSet regular = g.nodes() - adversaries;
  const int need = 2 * f + 1;
  for (NodeId i = 0; i < g.size(); ++i) {
    const auto idx = static_cast<std::size_t>(i);
    const NodeSet nbrs = m.neighbors[idx];
    if (!nbrs.is_subset_of(g.in_neighbors(i))) {
      return fail("node " + std::to_string(i + 1) + " listens to non-neighbors " +
                  to_string(nbrs - g.in_neighbors(i)));
    }
    if (!regular.contains(i)) continue;
    const int lvl = m.level[idx];
    const bool is_source = sources.contains(i);
    if ((lvl == 0) != is_source) {
      return fail("regular node " + std::to_string(i + 1) + " has level " + std::to_string(lvl) +
                  (is_source ? " but is a source" : " but level 0 must equal the sources"));
    }
    if (is_source) continue;
    if (nbrs.size() < need) {
      return fail("regular non-source node " + std::to_string(i + 1) + " listens to " +
                  std::to_string(nbrs.size()) + " < " + std::to_string(need) + " neighbors");
    }
    for (NodeId l : nbrs & regular) {
      if (m.level[static_cast<std::size_t>(l)] >= lvl) {
        return fail("regular neighbor " + std::to_string(l + 1) + " of node " +
                    std::to_string(i + 1) + " is not at a lower level");
      }
    }
  }
  return {};
}

}  // namespace resest
