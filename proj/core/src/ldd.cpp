#include "lddflow/ldd.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <tuple>

#include <nlohmann/json.hpp>

namespace lddflow {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Label {
  double key;    // dist(source, v) - shift(source)
  NodeId source;
  NodeId node;
  double dist;
  EdgeId via;

  bool operator>(const Label &o) const {
    return std::tie(key, source, node) > std::tie(o.key, o.source, o.node);
  }
};

LddPartition grow(const Graph &g, double rho, const std::vector<double> &shift,
                  const std::vector<char> &is_source) {
  const std::size_t n = g.num_nodes();
  std::priority_queue<Label, std::vector<Label>, std::greater<>> heap;
  for (NodeId u = 0; u < n; ++u)
    if (is_source[u]) heap.push({-shift[u], u, u, 0.0, kNoEdge});

  std::vector<NodeId> source(n, kNoNode);
  LddPartition p;
  p.rho = rho;
  p.tree.in_forest.assign(g.num_edges(), 0);
  p.tree.parent.assign(n, kNoNode);
  p.tree.parent_edge.assign(n, kNoEdge);
  p.tree.depth_dist.assign(n, kInf);
  while (!heap.empty()) {
    const Label top = heap.top();
    heap.pop();
    const NodeId v = top.node;
    if (source[v] != kNoNode) continue;
    source[v] = top.source;
    p.tree.depth_dist[v] = top.dist;
    p.tree.parent_edge[v] = top.via;
    p.tree.parent[v] = top.via == kNoEdge ? v : g.edge(top.via).other(v);
    if (top.via != kNoEdge) p.tree.in_forest[top.via] = 1;
    for (const Incidence &inc : g.neighbors(v)) {
      if (source[inc.neighbor] != kNoNode) continue;
      const double w = g.weight(inc.edge);
      heap.push({top.key + w, top.source, inc.neighbor, top.dist + w, inc.edge});
    }
  }

  // Centers are exactly the sources that claimed themselves.
  std::vector<std::uint32_t> id_of(n, 0);
  for (NodeId v = 0; v < n; ++v) {
    if (source[v] == v) {
      id_of[v] = static_cast<std::uint32_t>(p.center.size());
      p.center.push_back(v);
    }
  }
  p.component_of.resize(n);
  for (NodeId v = 0; v < n; ++v) p.component_of[v] = id_of[source[v]];
  return p;
}

} // namespace

std::uint64_t ldd_round_charge(std::size_t n) {
  const std::uint64_t levels = ceil_log2(n) + 1;
  return levels * levels;
}

LddPartition sample_ldd(MinorNetwork &net, double rho, std::uint64_t seed, const LddOptions &options) {
  if (!(rho >= 1.0)) throw Error(ErrorCode::invalid_argument, "LDD radius must be at least 1");
  const Graph &g = net.graph();
  const std::size_t n = g.num_nodes();
  Rng rng(seed);
  std::vector<double> shift(n, 0.0);
  std::vector<char> is_source(n, 1);
  if (n <= 1 || rho >= static_cast<double>(n - 1) * g.max_weight()) {
    std::fill(is_source.begin(), is_source.end(), 0);
    if (n > 0) is_source[rng.below(n)] = 1;
  } else {
    const double rate = options.quality_constant * std::log(static_cast<double>(n)) / rho;
    for (double &s : shift) s = rng.truncated_exponential(rate, rho);
  }
  LddPartition p = grow(g, rho, shift, is_source);
  net.charge_rounds(ldd_round_charge(n), "ldd");
  return p;
}

std::vector<std::string> verify_ldd(const Graph &g, const LddPartition &p, double rel_tol) {
  std::vector<std::string> bad;
  const std::size_t n = g.num_nodes();
  if (p.component_of.size() != n || p.tree.parent.size() != n || p.tree.parent_edge.size() != n ||
      p.tree.depth_dist.size() != n) {
    bad.push_back("partition size does not match the graph");
    return bad;
  }
  const std::size_t k = p.center.size();
  for (std::size_t c = 0; c < k; ++c) {
    const NodeId z = p.center[c];
    if (z >= n || p.component_of[z] != c) bad.push_back("center of component " + std::to_string(c) + " is not in it");
    else if (p.tree.parent_edge[z] != kNoEdge || p.tree.depth_dist[z] != 0.0)
      bad.push_back("center " + std::to_string(z + 1) + " has a parent or nonzero root distance");
  }
  if (!bad.empty()) return bad;

  auto near = [&](double a, double b) { return std::abs(a - b) <= rel_tol * std::max({1.0, std::abs(a), std::abs(b)}); };
  for (NodeId v = 0; v < n; ++v) {
    const std::string name = "node " + std::to_string(v + 1);
    if (p.component_of[v] >= k) {
      bad.push_back(name + ": component id out of range");
      continue;
    }
    const EdgeId e = p.tree.parent_edge[v];
    if (p.center[p.component_of[v]] == v) continue;
    if (e == kNoEdge || e >= g.num_edges() || (g.edge(e).tail != v && g.edge(e).head != v)) {
      bad.push_back(name + ": parent edge missing or not incident");
      continue;
    }
    const NodeId u = g.edge(e).other(v);
    if (p.tree.parent[v] != u) bad.push_back(name + ": parent pointer disagrees with parent edge");
    if (p.component_of[u] != p.component_of[v]) bad.push_back(name + ": parent edge leaves the component");
    if (!near(p.tree.depth_dist[v], p.tree.depth_dist[u] + g.weight(e)))
      bad.push_back(name + ": root distance is not parent distance plus edge weight");
  }
  for (NodeId v = 0; v < n; ++v) {
    // Following parents must reach the center within n steps.
    NodeId x = v;
    std::size_t steps = 0;
    while (steps <= n && x < n && p.tree.parent_edge[x] != kNoEdge) x = p.tree.parent[x], ++steps;
    if (steps > n || x >= n || x != p.center[p.component_of[v]])
      bad.push_back("node " + std::to_string(v + 1) + ": parent chain does not end at its center");
  }

  // Shortest-path distances inside each cluster.
  std::vector<double> dist(n, kInf);
  using Item = std::pair<double, NodeId>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
  for (NodeId z : p.center) {
    dist[z] = 0.0;
    heap.push({0.0, z});
  }
  while (!heap.empty()) {
    const auto [dv, v] = heap.top();
    heap.pop();
    if (dv > dist[v]) continue;
    for (const Incidence &inc : g.neighbors(v)) {
      if (p.component_of[inc.neighbor] != p.component_of[v]) continue;
      const double nd = dv + g.weight(inc.edge);
      if (nd < dist[inc.neighbor]) {
        dist[inc.neighbor] = nd;
        heap.push({nd, inc.neighbor});
      }
    }
  }
  for (NodeId v = 0; v < n; ++v) {
    const std::string name = "node " + std::to_string(v + 1);
    if (dist[v] == kInf) {
      bad.push_back(name + ": radius violated, unreachable from its center inside the component");
      continue;
    }
    if (!near(dist[v], p.tree.depth_dist[v])) bad.push_back(name + ": root distance is not a shortest-path distance");
    if (dist[v] > p.rho * (1.0 + rel_tol)) bad.push_back(name + ": radius violated");
  }
  for (EdgeId e = 0; e < g.num_edges(); ++e) {
    const bool expected = p.tree.parent_edge[g.edge(e).tail] == e || p.tree.parent_edge[g.edge(e).head] == e;
    if (e < p.tree.in_forest.size() && (p.tree.in_forest[e] != 0) != expected) {
      bad.push_back("edge " + std::to_string(e) + ": forest mask disagrees with parent edges");
      break;
    }
  }
  return bad;
}

nlohmann::json to_json(const LddPartition &p) {
  nlohmann::json parents = nlohmann::json::array();
  for (EdgeId e : p.tree.parent_edge) parents.push_back(e == kNoEdge ? -1 : static_cast<long long>(e));
  return {{"rho", p.rho},
          {"component_of", p.component_of},
          {"center", p.center},
          {"sp_parent", parents},
          {"root_dist", p.tree.depth_dist}};
}

LddPartition ldd_from_json(const Graph &g, const nlohmann::json &j) {
  try {
    LddPartition p;
    p.rho = j.at("rho").get<double>();
    p.component_of = j.at("component_of").get<std::vector<std::uint32_t>>();
    p.center = j.at("center").get<std::vector<NodeId>>();
    p.tree.depth_dist = j.at("root_dist").get<std::vector<double>>();
    const auto parents = j.at("sp_parent").get<std::vector<long long>>();
    const std::size_t n = g.num_nodes();
    if (p.component_of.size() != n || parents.size() != n || p.tree.depth_dist.size() != n)
      throw Error(ErrorCode::dimension_mismatch, "LDD JSON does not match the graph size");
    p.tree.in_forest.assign(g.num_edges(), 0);
    p.tree.parent.resize(n);
    p.tree.parent_edge.resize(n);
    for (NodeId v = 0; v < n; ++v) {
      if (parents[v] < 0) {
        p.tree.parent_edge[v] = kNoEdge;
        p.tree.parent[v] = v;
        continue;
      }
      const auto e = static_cast<EdgeId>(parents[v]);
      if (e >= g.num_edges()) throw Error(ErrorCode::parse, "LDD JSON parent edge out of range");
      p.tree.parent_edge[v] = e;
      p.tree.parent[v] = g.edge(e).other(v);
      p.tree.in_forest[e] = 1;
    }
    return p;
  } catch (const nlohmann::json::exception &ex) {
    throw Error(ErrorCode::parse, std::string("malformed LDD JSON: ") + ex.what());
  }
}

} // namespace lddflow
