#include "lddflow/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <functional>
#include <limits>
#include <numeric>
#include <queue>

namespace lddflow::oracle {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct UnionFind {
  std::vector<NodeId> parent;
  explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), NodeId{0}); }
  NodeId find(NodeId v) {
    while (parent[v] != v) v = parent[v] = parent[parent[v]];
    return v;
  }
  bool unite(NodeId a, NodeId b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    parent[std::max(a, b)] = std::min(a, b);
    return true;
  }
};

} // namespace

ShortestPaths dijkstra(const Graph &g, NodeId source) {
  const std::size_t n = g.num_nodes();
  ShortestPaths sp{std::vector<double>(n, kInf), std::vector<NodeId>(n, kNoNode),
                   std::vector<EdgeId>(n, kNoEdge)};
  using Item = std::pair<double, NodeId>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
  sp.dist[source] = 0.0;
  sp.parent[source] = source;
  heap.push({0.0, source});
  while (!heap.empty()) {
    auto [dv, v] = heap.top();
    heap.pop();
    if (dv > sp.dist[v]) continue;
    for (const Incidence &inc : g.neighbors(v)) {
      const double nd = dv + g.weight(inc.edge);
      if (nd < sp.dist[inc.neighbor]) {
        sp.dist[inc.neighbor] = nd;
        sp.parent[inc.neighbor] = v;
        sp.parent_edge[inc.neighbor] = inc.edge;
        heap.push({nd, inc.neighbor});
      }
    }
  }
  return sp;
}

std::vector<double> bellman_ford(const Graph &g, NodeId source) {
  std::vector<double> dist(g.num_nodes(), kInf);
  dist[source] = 0.0;
  for (std::size_t round = 0; round + 1 < g.num_nodes(); ++round) {
    bool changed = false;
    for (const Edge &e : g.edges()) {
      if (dist[e.tail] + e.weight < dist[e.head]) dist[e.head] = dist[e.tail] + e.weight, changed = true;
      if (dist[e.head] + e.weight < dist[e.tail]) dist[e.tail] = dist[e.head] + e.weight, changed = true;
    }
    if (!changed) break;
  }
  return dist;
}

SpanningTree kruskal(const Graph &g) {
  std::vector<EdgeId> order(g.num_edges());
  std::iota(order.begin(), order.end(), EdgeId{0});
  std::sort(order.begin(), order.end(), [&](EdgeId a, EdgeId b) {
    return std::pair{g.weight(a), a} < std::pair{g.weight(b), b};
  });
  UnionFind uf(g.num_nodes());
  SpanningTree t{0.0, std::vector<char>(g.num_edges(), 0)};
  for (EdgeId e : order) {
    if (uf.unite(g.edge(e).tail, g.edge(e).head)) {
      t.in_tree[e] = 1;
      t.weight += g.weight(e);
    }
  }
  return t;
}

std::vector<NodeId> union_find_components(const Graph &g, const std::vector<char> &mask) {
  UnionFind uf(g.num_nodes());
  for (EdgeId e = 0; e < g.num_edges(); ++e)
    if (mask[e]) uf.unite(g.edge(e).tail, g.edge(e).head);
  std::vector<NodeId> leader(g.num_nodes());
  for (NodeId v = 0; v < g.num_nodes(); ++v) leader[v] = uf.find(v);
  return leader;
}

Transshipment exact_transshipment(const Graph &g, const Demand &d) {
  const std::size_t n = g.num_nodes();
  if (d.size() != n) throw Error(ErrorCode::dimension_mismatch, "demand length does not match the graph");
  if (!is_proper(d)) throw Error(ErrorCode::improper_demand, "demand does not sum to zero");

  Transshipment result{0.0, EdgeVector(g.num_edges())};
  const double scale = std::max(1.0, d.norm1());
  const double tiny = 1e-13 * scale;
  std::vector<NodeId> sources, sinks;
  for (NodeId v = 0; v < n; ++v) {
    if (d[v] > tiny) sources.push_back(v);
    else if (d[v] < -tiny) sinks.push_back(v);
  }
  if (sources.empty() || sinks.empty()) return result;

  std::vector<ShortestPaths> trees;
  trees.reserve(sources.size());
  for (NodeId s : sources) trees.push_back(dijkstra(g, s));

  // Transportation network: 0 = super source, 1..S sources, S+1..S+T sinks,
  // S+T+1 = super sink. Residual arcs stored in pairs.
  const std::size_t S = sources.size(), T = sinks.size();
  const std::size_t N = S + T + 2, src = 0, snk = S + T + 1;
  struct Arc {
    std::size_t to;
    double cap, cost;
  };
  std::vector<Arc> arcs;
  std::vector<std::vector<std::size_t>> out(N);
  auto add = [&](std::size_t a, std::size_t b, double cap, double cost) {
    out[a].push_back(arcs.size());
    arcs.push_back({b, cap, cost});
    out[b].push_back(arcs.size());
    arcs.push_back({a, 0.0, -cost});
  };
  double supply_total = 0.0;
  for (std::size_t i = 0; i < S; ++i) {
    add(src, 1 + i, d[sources[i]], 0.0);
    supply_total += d[sources[i]];
  }
  for (std::size_t j = 0; j < T; ++j) add(1 + S + j, snk, -d[sinks[j]], 0.0);
  std::vector<std::vector<std::size_t>> pair_arc(S, std::vector<std::size_t>(T));
  for (std::size_t i = 0; i < S; ++i) {
    for (std::size_t j = 0; j < T; ++j) {
      pair_arc[i][j] = arcs.size();
      add(1 + i, 1 + S + j, kInf, trees[i].dist[sinks[j]]);
    }
  }

  // Successive shortest paths with Bellman-Ford on the residual network
  // (residual costs can be negative; the network is tiny).
  double shipped = 0.0;
  const double eps = 1e-12 * scale;
  while (shipped < supply_total - eps) {
    std::vector<double> dist(N, kInf);
    std::vector<std::size_t> via(N, SIZE_MAX);
    std::vector<char> queued(N, 0);
    std::deque<std::size_t> queue{src};
    dist[src] = 0.0;
    queued[src] = 1;
    while (!queue.empty()) {
      const std::size_t a = queue.front();
      queue.pop_front();
      queued[a] = 0;
      for (std::size_t id : out[a]) {
        const Arc &arc = arcs[id];
        if (arc.cap <= eps) continue;
        const double nd = dist[a] + arc.cost;
        if (nd < dist[arc.to] - 1e-12 * std::max(1.0, std::abs(nd))) {
          dist[arc.to] = nd;
          via[arc.to] = id;
          if (!queued[arc.to]) {
            queued[arc.to] = 1;
            queue.push_back(arc.to);
          }
        }
      }
    }
    if (dist[snk] == kInf) break;
    double push = kInf;
    for (std::size_t v = snk; v != src; v = arcs[via[v] ^ 1].to) push = std::min(push, arcs[via[v]].cap);
    for (std::size_t v = snk; v != src; v = arcs[via[v] ^ 1].to) {
      arcs[via[v]].cap -= push;
      arcs[via[v] ^ 1].cap += push;
    }
    shipped += push;
  }

  for (std::size_t i = 0; i < S; ++i) {
    for (std::size_t j = 0; j < T; ++j) {
      const double amount = arcs[pair_arc[i][j] ^ 1].cap;
      if (amount <= 0.0) continue;
      result.cost += amount * trees[i].dist[sinks[j]];
      // Push the amount along the shortest path from source i to sink j.
      for (NodeId v = sinks[j]; v != sources[i]; v = trees[i].parent[v]) {
        const EdgeId e = trees[i].parent_edge[v];
        // Flow moves from parent[v] to v.
        result.flow[e] += g.edge(e).tail == trees[i].parent[v] ? amount : -amount;
      }
    }
  }
  return result;
}

TreeSums dfs_tree_sums(const std::vector<NodeId> &parent, const NodeVector &x) {
  const std::size_t n = parent.size();
  std::vector<std::vector<NodeId>> children(n);
  for (NodeId v = 0; v < n; ++v)
    if (parent[v] != v) children[parent[v]].push_back(v);
  TreeSums sums{NodeVector(n), NodeVector(n)};
  std::function<double(NodeId, double)> visit = [&](NodeId v, double above) {
    sums.anc[v] = above;
    double total = x[v];
    for (NodeId c : children[v]) total += visit(c, above + x[v]);
    sums.desc[v] = total;
    return total;
  };
  for (NodeId v = 0; v < n; ++v)
    if (parent[v] == v) visit(v, 0.0);
  return sums;
}

std::vector<double> tree_depths(const Graph &g, const std::vector<NodeId> &parent,
                                const std::vector<EdgeId> &parent_edge) {
  const std::size_t n = parent.size();
  std::vector<double> depth(n, kInf);
  std::function<double(NodeId, std::size_t)> get = [&](NodeId v, std::size_t budget) -> double {
    if (depth[v] != kInf) return depth[v];
    if (parent[v] == v) return depth[v] = 0.0;
    if (budget == 0) return kInf;
    const double up = get(parent[v], budget - 1);
    return depth[v] = up + g.weight(parent_edge[v]);
  };
  for (NodeId v = 0; v < n; ++v) get(v, n);
  return depth;
}

std::vector<char> pointer_chasing_cycles(const std::vector<NodeId> &successor) {
  const std::size_t n = successor.size();
  std::vector<char> on_cycle(n, 0);
  for (NodeId v = 0; v < n; ++v) {
    NodeId x = v;
    for (std::size_t step = 0; step < n; ++step) x = successor[x];
    // x is now on the cycle of v's component; mark it.
    NodeId y = x;
    do {
      on_cycle[y] = 1;
      y = successor[y];
    } while (y != x);
  }
  return on_cycle;
}

} // namespace lddflow::oracle
