#include "lddflow/primitives.hpp"

#include <algorithm>
#include <climits>
#include <cmath>
#include <queue>
#include <string>

namespace lddflow {

unsigned ceil_log2(std::size_t n) {
  unsigned k = 0;
  while ((std::size_t{1} << k) < n) ++k;
  return k;
}

namespace {

constexpr unsigned kNever = UINT_MAX;

bool heads(std::uint64_t seed, unsigned phase, NodeId leader) {
  return (derive_seed(seed, {phase, leader}) & 1U) != 0;
}

AggregationOp<std::uint8_t> bit_or() {
  return {0, [](std::uint8_t a, std::uint8_t b) { return static_cast<std::uint8_t>(a | b); }};
}

AggregationOp<EdgeId> min_edge() { return ops::min<EdgeId>(kNoEdge); }
AggregationOp<NodeId> min_node() { return ops::min<NodeId>(kNoNode); }

bool all_contracted_flag(MinorNetwork &net, std::string_view label,
                         const std::function<bool(NodeId)> &flag) {
  RoundSpec<bool, ops::Nothing> spec;
  spec.label = label;
  spec.contract = [](EdgeId) { return true; };
  spec.input = flag;
  spec.consensus = ops::any();
  spec.aggregate = ops::none();
  const auto r = net.run_round(spec);
  return !r.consensus.empty() && r.consensus[0];
}

void require_plain(const MinorNetwork &net, const char *what) {
  if (net.has_frozen_edges()) {
    throw Error(ErrorCode::invalid_argument, std::string(what) + " needs a network without frozen edges");
  }
}

} // namespace

std::string validate_forest(const Graph &g, const RootedForest &f, double rel_tol) {
  const std::size_t n = g.num_nodes();
  if (f.parent.size() != n || f.parent_edge.size() != n || f.depth_dist.size() != n ||
      f.in_forest.size() != g.num_edges()) {
    return "forest arrays have the wrong length";
  }
  std::size_t tree_edges = 0;
  for (NodeId v = 0; v < n; ++v) {
    if (f.parent[v] == v) {
      if (f.parent_edge[v] != kNoEdge) return "root " + std::to_string(v + 1) + " has a parent edge";
      if (f.depth_dist[v] != 0.0) return "root " + std::to_string(v + 1) + " has nonzero depth";
      continue;
    }
    const EdgeId e = f.parent_edge[v];
    if (e >= g.num_edges() || !f.in_forest[e]) return "node " + std::to_string(v + 1) + " has an invalid parent edge";
    const Edge &edge = g.edge(e);
    if (!((edge.tail == v && edge.head == f.parent[v]) || (edge.head == v && edge.tail == f.parent[v]))) {
      return "parent edge of node " + std::to_string(v + 1) + " does not join it to its parent";
    }
    const double expect = f.depth_dist[f.parent[v]] + edge.weight;
    if (std::abs(f.depth_dist[v] - expect) > rel_tol * std::max(1.0, expect)) {
      return "depth of node " + std::to_string(v + 1) + " is inconsistent";
    }
    ++tree_edges;
  }
  if (tree_edges != static_cast<std::size_t>(std::count(f.in_forest.begin(), f.in_forest.end(), 1))) {
    return "forest edges do not match parent edges";
  }
  for (NodeId v = 0; v < n; ++v) {
    NodeId u = v;
    std::size_t steps = 0;
    while (f.parent[u] != u) {
      u = f.parent[u];
      if (++steps > n) return "parent pointers contain a cycle";
    }
  }
  return {};
}

std::vector<NodeId> connected_components(MinorNetwork &net, const std::vector<char> &subgraph) {
  if (subgraph.size() != net.num_edges()) {
    throw Error(ErrorCode::dimension_mismatch, "connected_components: edge mask has the wrong length");
  }
  RoundSpec<NodeId, ops::Nothing> spec;
  spec.label = "components";
  spec.contract = [&](EdgeId e) { return subgraph[e] != 0; };
  spec.input = [](NodeId v) { return v; };
  spec.consensus = min_node();
  spec.aggregate = ops::none();
  return net.run_round(spec).consensus;
}

std::vector<char> mst_boruvka(MinorNetwork &net) {
  const Graph &g = net.graph();
  using Key = std::pair<double, EdgeId>;
  const Key none{INFINITY, kNoEdge};
  std::vector<char> in_tree(g.num_edges(), 0);
  auto key = [&](EdgeId e) { return Key{g.weight(e), e}; };

  // Every phase at least halves the number of supernodes that still have an
  // outgoing edge, so ceil(log2 n) phases always suffice.
  const unsigned phases = ceil_log2(g.num_nodes());
  for (unsigned phase = 0; phase < phases; ++phase) {
    RoundSpec<ops::Nothing, Key> find;
    find.label = "boruvka_min_edge";
    find.contract = [&](EdgeId e) { return in_tree[e] != 0; };
    find.consensus = ops::none();
    find.edge = [&](EdgeId e, ops::Nothing, ops::Nothing) { return std::pair{key(e), key(e)}; };
    find.aggregate = ops::min<Key>(none);
    const auto lightest = net.run_round(find).aggregate;

    RoundSpec<Key, ops::Nothing> mark;
    mark.label = "boruvka_mark";
    mark.contract = [&](EdgeId e) { return in_tree[e] != 0; };
    mark.input = [&](NodeId v) { return lightest[v]; };
    mark.consensus = ops::min<Key>(none);
    mark.edge = [&](EdgeId e, const Key &a, const Key &b) {
      if (key(e) == a || key(e) == b) in_tree[e] = 1;
      return std::pair{ops::Nothing{}, ops::Nothing{}};
    };
    mark.aggregate = ops::none();
    net.run_round(mark);
  }
  return in_tree;
}

SubtreeSums subtree_sums(MinorNetwork &net, const RootedForest &forest, const NodeVector &x,
                         std::uint64_t seed) {
  require_plain(net, "subtree_sums");
  const Graph &g = net.graph();
  const std::size_t n = g.num_nodes();
  const std::size_t m = g.num_edges();
  if (x.size() != n || forest.parent.size() != n) {
    throw Error(ErrorCode::dimension_mismatch, "subtree_sums: vector length does not match the graph");
  }

  // The child endpoint of a forest edge is known to the edge.
  std::vector<NodeId> child_of(m, kNoNode);
  for (NodeId v = 0; v < n; ++v)
    if (forest.parent_edge[v] != kNoEdge) child_of[forest.parent_edge[v]] = v;

  constexpr std::uint8_t kHasParent = 1, kAbsorbed = 2;
  std::vector<unsigned> level(m, kNever); // phase in which the edge was contracted
  std::vector<std::vector<char>> absorbed;
  std::vector<double> inner_anc(n, 0.0);
  std::vector<double> carry(m, 0.0);

  unsigned phase = 0;
  for (;; ++phase) {
    auto contracted = [&, phase](EdgeId e) { return level[e] < phase; };

    // A tails piece joins its parent piece if the parent flipped heads.
    RoundSpec<NodeId, std::uint8_t> decide;
    decide.label = "subtree_decide";
    decide.contract = contracted;
    decide.input = [](NodeId v) { return v; };
    decide.consensus = min_node();
    decide.edge = [&](EdgeId e, NodeId tail_leader, NodeId head_leader) {
      const NodeId c = child_of[e];
      if (c == kNoNode) return std::pair<std::uint8_t, std::uint8_t>{0, 0};
      const bool child_is_tail = c == g.edge(e).tail;
      const NodeId child_leader = child_is_tail ? tail_leader : head_leader;
      const NodeId parent_leader = child_is_tail ? head_leader : tail_leader;
      std::uint8_t flags = kHasParent;
      if (!heads(seed, phase, child_leader) && heads(seed, phase, parent_leader)) {
        level[e] = phase;
        flags |= kAbsorbed;
      }
      return child_is_tail ? std::pair<std::uint8_t, std::uint8_t>{flags, 0}
                           : std::pair<std::uint8_t, std::uint8_t>{0, flags};
    };
    decide.aggregate = bit_or();
    const auto decided = net.run_round(decide).aggregate;

    if (!all_contracted_flag(net, "subtree_done", [&](NodeId v) { return (decided[v] & kHasParent) != 0; })) {
      break;
    }
    std::vector<char> &joined = absorbed.emplace_back(n, 0);
    for (NodeId v = 0; v < n; ++v) joined[v] = (decided[v] & kAbsorbed) != 0;

    // The joining edge reads the parent endpoint's prefix...
    RoundSpec<double, ops::Nothing> read;
    read.label = "subtree_anc_read";
    read.input = [&](NodeId v) { return inner_anc[v] + x[v]; };
    read.consensus = ops::sum<double>();
    read.edge = [&](EdgeId e, double tail_value, double head_value) {
      if (level[e] == phase) carry[e] = child_of[e] == g.edge(e).tail ? head_value : tail_value;
      return std::pair{ops::Nothing{}, ops::Nothing{}};
    };
    read.aggregate = ops::none();
    net.run_round(read);

    // ...and hands it to every node of the joining piece.
    RoundSpec<ops::Nothing, double> deliver;
    deliver.label = "subtree_anc_deliver";
    deliver.contract = contracted;
    deliver.consensus = ops::none();
    deliver.edge = [&](EdgeId e, ops::Nothing, ops::Nothing) {
      if (level[e] != phase) return std::pair{0.0, 0.0};
      return child_of[e] == g.edge(e).tail ? std::pair{carry[e], 0.0} : std::pair{0.0, carry[e]};
    };
    deliver.aggregate = ops::sum<double>();
    const auto delivered = net.run_round(deliver).aggregate;
    for (NodeId v = 0; v < n; ++v)
      if (joined[v]) inner_anc[v] += delivered[v];
  }

  // Descendant sums, unrolling the contraction from whole trees downward.
  RoundSpec<double, ops::Nothing> total;
  total.label = "subtree_total";
  total.contract = [&, phase](EdgeId e) { return level[e] < phase; };
  total.input = [&](NodeId v) { return x[v]; };
  total.consensus = ops::sum<double>();
  total.aggregate = ops::none();
  std::vector<double> desc = net.run_round(total).consensus;

  using Pair = std::pair<double, double>;
  AggregationOp<Pair> sum_and_keep{
      {0.0, -INFINITY},
      [](const Pair &a, const Pair &b) { return Pair{a.first + b.first, std::max(a.second, b.second)}; }};
  sum_and_keep.equal = [](const Pair &a, const Pair &b) {
    return std::abs(a.first - b.first) <= 1e-9 * std::max({1.0, std::abs(a.first), std::abs(b.first)}) &&
           a.second == b.second;
  };
  for (unsigned k = phase; k-- > 0;) {
    RoundSpec<Pair, double> back;
    back.label = "subtree_desc";
    back.contract = [&, k](EdgeId e) { return level[e] < k; };
    back.input = [&](NodeId v) { return Pair{x[v], desc[v]}; };
    back.consensus = sum_and_keep;
    back.edge = [&, k](EdgeId e, const Pair &tail_piece, const Pair &head_piece) {
      const NodeId c = child_of[e];
      if (c == kNoNode || level[e] == k) return std::pair{0.0, 0.0};
      return c == g.edge(e).tail ? std::pair{0.0, tail_piece.second} : std::pair{head_piece.second, 0.0};
    };
    back.aggregate = ops::sum<double>();
    const auto r = net.run_round(back);
    for (NodeId v = 0; v < n; ++v)
      if (absorbed[k][v]) desc[v] = r.consensus[v].first + r.aggregate[v];
  }

  return {NodeVector(std::move(desc)), NodeVector(std::move(inner_anc))};
}

RootedForest root_forest(MinorNetwork &net, const std::vector<char> &forest,
                         const std::vector<char> &is_root, std::uint64_t seed) {
  require_plain(net, "root_forest");
  const Graph &g = net.graph();
  const std::size_t n = g.num_nodes();
  const std::size_t m = g.num_edges();
  if (forest.size() != m || is_root.size() != n) {
    throw Error(ErrorCode::dimension_mismatch, "root_forest: mask length does not match the graph");
  }

  // Components with their root counts, then a global edge count.
  using LeaderRoots = std::pair<NodeId, std::uint32_t>;
  RoundSpec<LeaderRoots, ops::Nothing> comps;
  comps.label = "root_components";
  comps.contract = [&](EdgeId e) { return forest[e] != 0; };
  comps.input = [&](NodeId v) { return LeaderRoots{v, is_root[v] ? 1U : 0U}; };
  comps.consensus = {{kNoNode, 0},
                     [](const LeaderRoots &a, const LeaderRoots &b) {
                       return LeaderRoots{std::min(a.first, b.first), a.second + b.second};
                     }};
  comps.aggregate = ops::none();
  const auto components = net.run_round(comps).consensus;

  RoundSpec<long long, ops::Nothing> count;
  count.label = "root_forest_check";
  count.contract = [](EdgeId) { return true; };
  count.input = [&](NodeId v) {
    long long local = components[v].first == v ? 0 : -1;
    for (const Incidence &inc : g.neighbors(v))
      if (forest[inc.edge] && g.edge(inc.edge).tail == v) ++local;
    return local;
  };
  count.consensus = ops::sum<long long>();
  count.aggregate = ops::none();
  const auto excess = net.run_round(count).consensus;
  if (n > 0 && excess[0] != 0) throw Error(ErrorCode::not_a_forest, "claimed forest contains a cycle");
  for (NodeId v = 0; v < n; ++v) {
    if (components[v].second != 1) {
      throw Error(ErrorCode::invalid_argument, "every tree needs exactly one designated root");
    }
  }

  // Unrooted random-mate contraction: a tails piece joins one heads neighbour.
  struct Choice {
    EdgeId edge = kNoEdge;
    std::uint8_t has_edge = 0;
  };
  AggregationOp<Choice> choice_op{
      {}, [](const Choice &a, const Choice &b) {
        return Choice{std::min(a.edge, b.edge), static_cast<std::uint8_t>(a.has_edge | b.has_edge)};
      }};
  choice_op.equal = [](const Choice &a, const Choice &b) { return a.edge == b.edge && a.has_edge == b.has_edge; };

  std::vector<unsigned> level(m, kNever);
  std::vector<std::vector<char>> absorbed;
  unsigned phase = 0;
  for (;; ++phase) {
    auto contracted = [&, phase](EdgeId e) { return level[e] < phase; };
    RoundSpec<NodeId, Choice> propose;
    propose.label = "root_propose";
    propose.contract = contracted;
    propose.input = [](NodeId v) { return v; };
    propose.consensus = min_node();
    propose.edge = [&](EdgeId e, NodeId a, NodeId b) {
      Choice za, zb;
      if (!forest[e]) return std::pair{za, zb};
      za.has_edge = zb.has_edge = 1;
      const bool ha = heads(seed, phase, a), hb = heads(seed, phase, b);
      if (!ha && hb) za.edge = e;
      if (!hb && ha) zb.edge = e;
      return std::pair{za, zb};
    };
    propose.aggregate = choice_op;
    const auto proposals = net.run_round(propose).aggregate;

    if (!all_contracted_flag(net, "root_done", [&](NodeId v) { return proposals[v].has_edge != 0; })) break;
    std::vector<char> &joined = absorbed.emplace_back(n, 0);
    for (NodeId v = 0; v < n; ++v) joined[v] = proposals[v].edge != kNoEdge;

    RoundSpec<EdgeId, ops::Nothing> accept;
    accept.label = "root_accept";
    accept.contract = contracted;
    accept.input = [&](NodeId v) { return proposals[v].edge; };
    accept.consensus = min_edge();
    accept.edge = [&](EdgeId e, EdgeId a, EdgeId b) {
      if (forest[e] && (e == a || e == b)) level[e] = phase;
      return std::pair{ops::Nothing{}, ops::Nothing{}};
    };
    accept.aggregate = ops::none();
    net.run_round(accept);
  }

  // Unroll: every piece learns its entry node, the node closest to the root.
  RoundSpec<NodeId, ops::Nothing> top;
  top.label = "root_top";
  top.contract = [&, phase](EdgeId e) { return level[e] < phase; };
  top.input = [&](NodeId v) { return is_root[v] ? v : kNoNode; };
  top.consensus = min_node();
  top.aggregate = ops::none();
  std::vector<NodeId> entry = net.run_round(top).consensus;

  constexpr std::uint8_t kHoldsEntry = 1, kJoined = 2;
  std::vector<NodeId> child_end(m, kNoNode);
  for (unsigned k = phase; k-- > 0;) {
    RoundSpec<std::uint8_t, NodeId> down;
    down.label = "root_unroll";
    down.contract = [&, k](EdgeId e) { return level[e] < k; };
    down.input = [&, k](NodeId v) {
      return static_cast<std::uint8_t>((entry[v] == v ? kHoldsEntry : 0) | (absorbed[k][v] ? kJoined : 0));
    };
    down.consensus = bit_or();
    down.edge = [&, k](EdgeId e, std::uint8_t a, std::uint8_t b) {
      std::pair<NodeId, NodeId> z{kNoNode, kNoNode};
      if (level[e] != k) return z;
      const Edge &edge = g.edge(e);
      if (!(a & kHoldsEntry) && ((b & kHoldsEntry) || (a & kJoined))) {
        z.first = edge.tail;
        child_end[e] = edge.tail;
      } else if (!(b & kHoldsEntry) && ((a & kHoldsEntry) || (b & kJoined))) {
        z.second = edge.head;
        child_end[e] = edge.head;
      }
      return z;
    };
    down.aggregate = min_node();
    const auto r = net.run_round(down);
    for (NodeId v = 0; v < n; ++v)
      if (!(r.consensus[v] & kHoldsEntry)) entry[v] = r.aggregate[v];
  }

  RoundSpec<ops::Nothing, EdgeId> learn;
  learn.label = "root_parent";
  learn.consensus = ops::none();
  learn.edge = [&](EdgeId e, ops::Nothing, ops::Nothing) {
    std::pair<EdgeId, EdgeId> z{kNoEdge, kNoEdge};
    if (!forest[e]) return z;
    (child_end[e] == g.edge(e).tail ? z.first : z.second) = e;
    return z;
  };
  learn.aggregate = min_edge();
  const auto parent_edges = net.run_round(learn).aggregate;

  RootedForest out;
  out.in_forest = forest;
  out.parent.resize(n);
  out.parent_edge = parent_edges;
  out.depth_dist.assign(n, 0.0);
  NodeVector own_weight(n);
  for (NodeId v = 0; v < n; ++v) {
    const EdgeId e = parent_edges[v];
    out.parent[v] = e == kNoEdge ? v : g.edge(e).other(v);
    if (e != kNoEdge) own_weight[v] = g.weight(e);
  }
  const SubtreeSums sums = subtree_sums(net, out, own_weight, derive_seed(seed, {0xd15, 0}));
  for (NodeId v = 0; v < n; ++v) out.depth_dist[v] = is_root[v] ? 0.0 : sums.anc[v] + own_weight[v];
  return out;
}

TreeSweep::TreeSweep(const RootedForest &forest) : parent_(forest.parent) {
  const std::size_t n = parent_.size();
  std::vector<std::size_t> start(n + 1, 0);
  for (NodeId v = 0; v < n; ++v)
    if (parent_[v] != v) ++start[parent_[v] + 1];
  for (std::size_t i = 0; i < n; ++i) start[i + 1] += start[i];
  std::vector<NodeId> children(start[n]);
  std::vector<std::size_t> fill(start.begin(), start.end() - 1);
  for (NodeId v = 0; v < n; ++v)
    if (parent_[v] != v) children[fill[parent_[v]]++] = v;
  order_.reserve(n);
  for (NodeId r = 0; r < n; ++r) {
    if (parent_[r] != r) continue;
    const std::size_t first = order_.size();
    order_.push_back(r);
    for (std::size_t i = first; i < order_.size(); ++i) {
      const NodeId v = order_[i];
      for (std::size_t c = start[v]; c < start[v + 1]; ++c) order_.push_back(children[c]);
    }
  }
  if (order_.size() != n) throw Error(ErrorCode::not_a_forest, "parent pointers contain a cycle");
}

NodeVector TreeSweep::descendant_sums(const NodeVector &x) const {
  NodeVector out = x;
  for (std::size_t i = order_.size(); i-- > 0;) {
    const NodeId v = order_[i];
    if (parent_[v] != v) out[parent_[v]] += out[v];
  }
  return out;
}

NodeVector TreeSweep::ancestor_sums(const NodeVector &x) const {
  NodeVector out(x.size());
  for (const NodeId v : order_)
    if (parent_[v] != v) out[v] = out[parent_[v]] + x[parent_[v]];
  return out;
}

namespace {

/// One level of the FindCycles contraction hierarchy.
struct CycleLevel {
  std::vector<NodeId> piece;       // node -> piece id (minimum member)
  std::vector<NodeId> exit_node;   // piece id -> member whose arc leaves it, kNoNode if closed
};

} // namespace

std::vector<char> find_cycles(MinorNetwork &net, std::span<const Arc> arcs, std::uint64_t seed,
                              const CycleOptions &options) {
  require_plain(net, "find_cycles");
  const Graph &g = net.graph();
  const std::size_t n = g.num_nodes();
  const std::size_t m = g.num_edges();

  std::vector<EdgeId> out(n, kNoEdge);
  std::vector<char> has_arc(n, 0);
  std::vector<char> self_loop(n, 0);
  for (const Arc &a : arcs) {
    if (a.from >= n) throw Error(ErrorCode::node_out_of_range, "find_cycles: arc source out of range");
    if (has_arc[a.from]) throw Error(ErrorCode::not_functional, "node " + std::to_string(a.from + 1) + " has several out-arcs");
    if (a.edge != kNoEdge && (a.edge >= m || (g.edge(a.edge).tail != a.from && g.edge(a.edge).head != a.from))) {
      throw Error(ErrorCode::not_functional, "arc of node " + std::to_string(a.from + 1) + " is not incident to it");
    }
    has_arc[a.from] = 1;
    out[a.from] = a.edge;
    self_loop[a.from] = a.edge == kNoEdge;
  }
  for (NodeId v = 0; v < n; ++v)
    if (!has_arc[v]) throw Error(ErrorCode::not_functional, "node " + std::to_string(v + 1) + " has no out-arc");

  auto target = [&](NodeId v) { return out[v] == kNoEdge ? v : g.edge(out[v]).other(v); };
  std::vector<char> arc_edge(m, 0);
  for (NodeId v = 0; v < n; ++v)
    if (out[v] != kNoEdge) arc_edge[out[v]] = 1;

  // Step 1: components of the arc graph and whether they hold a self-loop.
  using LeaderLoop = std::pair<NodeId, bool>;
  RoundSpec<LeaderLoop, ops::Nothing> comps;
  comps.label = "cycles_components";
  comps.contract = [&](EdgeId e) { return arc_edge[e] != 0; };
  comps.input = [&](NodeId v) { return LeaderLoop{v, self_loop[v] != 0}; };
  comps.consensus = {{kNoNode, false}, [](const LeaderLoop &a, const LeaderLoop &b) {
                       return LeaderLoop{std::min(a.first, b.first), a.second || b.second};
                     }};
  comps.aggregate = ops::none();
  const auto components = net.run_round(comps).consensus;

  std::vector<char> on_cycle(n, 0);
  std::vector<char> done_component(n, 0); // indexed by component leader
  for (NodeId v = 0; v < n; ++v) {
    if (components[v].second) {
      on_cycle[v] = self_loop[v];
      done_component[components[v].first] = 1;
    }
  }

  const unsigned cutoff = options.walk_factor * ceil_log2(n) + options.walk_offset;
  std::vector<CycleLevel> levels;
  auto build_level = [&](std::vector<NodeId> piece) {
    CycleLevel level;
    level.piece = std::move(piece);
    level.exit_node.assign(n, kNoNode);
    for (NodeId v = 0; v < n; ++v) {
      if (level.piece[target(v)] == level.piece[v]) continue;
      if (level.exit_node[level.piece[v]] != kNoNode) {
        throw Error(ErrorCode::not_functional, "contracted piece has several out-arcs");
      }
      level.exit_node[level.piece[v]] = v;
    }
    return level;
  };
  {
    std::vector<NodeId> singletons(n);
    std::iota(singletons.begin(), singletons.end(), NodeId{0});
    levels.push_back(build_level(std::move(singletons)));
  }

  // A found cycle: pieces of some level in cycle order with their entry nodes
  // (kNoNode for a single closed piece).
  struct Found {
    std::size_t level;
    std::vector<std::pair<NodeId, NodeId>> pieces;
  };
  std::vector<Found> found;
  std::vector<char> contracted(m, 0);

  const unsigned max_rounds = 64 * (ceil_log2(n) + 1);
  for (unsigned round = 0;; ++round) {
    if (round == max_rounds) throw Error(ErrorCode::iteration_cap, "find_cycles did not converge");
    const CycleLevel &cur = levels.back();
    auto succ = [&](NodeId piece) {
      const NodeId x = cur.exit_node[piece];
      return x == kNoNode ? piece : cur.piece[target(x)];
    };
    auto sampled = [&](NodeId piece) {
      return static_cast<double>(derive_seed(seed, {round, piece}) >> 11) * 0x1.0p-53 <
             options.sample_probability;
    };

    // Walks from sampled pieces, one step per round, up to the cutoff.
    unsigned longest_walk = 0;
    std::vector<NodeId> best_start(n, kNoNode); // component leader -> walk start
    for (NodeId p = 0; p < n; ++p) {
      if (cur.piece[p] != p || !sampled(p)) continue;
      const NodeId comp = components[p].first;
      if (done_component[comp]) continue;
      std::vector<NodeId> visited{p};
      NodeId x = p;
      bool cycle = false;
      for (unsigned step = 1; step <= cutoff; ++step) {
        x = succ(x);
        longest_walk = std::max(longest_walk, step);
        if (std::find(visited.begin(), visited.end(), x) != visited.end()) {
          cycle = true;
          break;
        }
        if (sampled(x)) break;
        visited.push_back(x);
      }
      if (cycle && (best_start[comp] == kNoNode || p < best_start[comp])) best_start[comp] = p;
    }
    net.charge_rounds(longest_walk + 1, "cycles_walk");

    for (NodeId comp = 0; comp < n; ++comp) {
      if (best_start[comp] == kNoNode) continue;
      std::vector<NodeId> path{best_start[comp]};
      NodeId x = succ(best_start[comp]);
      while (std::find(path.begin(), path.end(), x) == path.end()) {
        path.push_back(x);
        x = succ(x);
      }
      Found f{levels.size() - 1, {}};
      const auto first = std::find(path.begin(), path.end(), x);
      std::vector<NodeId> cyc(first, path.end());
      if (cyc.size() == 1 && cur.exit_node[cyc[0]] == kNoNode) {
        f.pieces.push_back({cyc[0], kNoNode});
      } else {
        for (std::size_t i = 0; i < cyc.size(); ++i) {
          const NodeId prev = cyc[(i + cyc.size() - 1) % cyc.size()];
          f.pieces.push_back({cyc[i], target(cur.exit_node[prev])});
        }
      }
      found.push_back(std::move(f));
      done_component[comp] = 1;
    }

    bool all_done = true;
    for (NodeId v = 0; v < n; ++v) all_done = all_done && done_component[components[v].first];
    if (all_done) break;

    // Contract every arc except those from a sampled piece to an unsampled one.
    for (NodeId v = 0; v < n; ++v) {
      if (out[v] == kNoEdge || done_component[components[v].first]) continue;
      const NodeId a = cur.piece[v], b = cur.piece[target(v)];
      if (a != b && !(sampled(a) && !sampled(b))) contracted[out[v]] = 1;
    }
    RoundSpec<NodeId, ops::Nothing> shrink;
    shrink.label = "cycles_contract";
    shrink.contract = [&](EdgeId e) { return contracted[e] != 0; };
    shrink.input = [](NodeId v) { return v; };
    shrink.consensus = min_node();
    shrink.aggregate = ops::none();
    levels.push_back(build_level(net.run_round(shrink).consensus));
  }

  // Backtrack each cycle down to single nodes, walking inside every piece
  // from the entry to the exit one step per round. Components backtrack in
  // parallel, so each level costs its longest walk.
  std::vector<long long> walk_at(levels.size(), -1);
  for (const Found &f : found) {
    std::vector<std::pair<NodeId, NodeId>> cyc = f.pieces;
    for (std::size_t lvl = f.level; lvl-- > 0;) {
      const CycleLevel &upper = levels[lvl + 1];
      const CycleLevel &lower = levels[lvl];
      auto succ = [&](NodeId piece) {
        const NodeId x = lower.exit_node[piece];
        return x == kNoNode ? piece : lower.piece[target(x)];
      };
      std::vector<std::pair<NodeId, NodeId>> next;
      unsigned steps = 0;
      if (cyc.size() == 1 && cyc[0].second == kNoNode) {
        // Closed piece: its sub-pieces form a functional graph with one cycle.
        NodeId x = lower.piece[cyc[0].first];
        std::vector<NodeId> path;
        while (std::find(path.begin(), path.end(), x) == path.end()) {
          path.push_back(x);
          x = succ(x);
          ++steps;
        }
        std::vector<NodeId> inner(std::find(path.begin(), path.end(), x), path.end());
        if (inner.size() == 1 && lower.exit_node[inner[0]] == kNoNode) {
          next.push_back({inner[0], kNoNode});
        } else {
          for (std::size_t i = 0; i < inner.size(); ++i) {
            const NodeId prev = inner[(i + inner.size() - 1) % inner.size()];
            next.push_back({inner[i], target(lower.exit_node[prev])});
          }
        }
      } else {
        for (const auto &[piece, entry] : cyc) {
          const NodeId exit = upper.exit_node[piece];
          NodeId x = lower.piece[entry];
          NodeId at = entry;
          unsigned local = 0;
          while (true) {
            next.push_back({x, at});
            if (lower.exit_node[x] == exit) break;
            at = target(lower.exit_node[x]);
            x = lower.piece[at];
            ++local;
          }
          steps = std::max(steps, local);
        }
      }
      walk_at[lvl] = std::max<long long>(walk_at[lvl], steps);
      cyc = std::move(next);
    }
    for (const auto &[node, entry] : cyc) on_cycle[node] = 1;
  }
  for (const long long steps : walk_at)
    if (steps >= 0) net.charge_rounds(static_cast<std::uint64_t>(steps) + 1, "cycles_backtrack");
  return on_cycle;
}

} // namespace lddflow
