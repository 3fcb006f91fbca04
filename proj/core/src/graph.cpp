#include "lddflow/graph.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <tuple>

namespace lddflow {

std::string_view to_string(ErrorCode code) {
  switch (code) {
  case ErrorCode::parse: return "parse";
  case ErrorCode::disconnected: return "disconnected";
  case ErrorCode::weight_out_of_range: return "weight_out_of_range";
  case ErrorCode::duplicate_edge: return "duplicate_edge";
  case ErrorCode::self_loop: return "self_loop";
  case ErrorCode::node_out_of_range: return "node_out_of_range";
  case ErrorCode::dimension_mismatch: return "dimension_mismatch";
  case ErrorCode::invalid_argument: return "invalid_argument";
  case ErrorCode::improper_demand: return "improper_demand";
  case ErrorCode::iteration_cap: return "iteration_cap";
  case ErrorCode::depth_cap: return "depth_cap";
  case ErrorCode::not_a_forest: return "not_a_forest";
  case ErrorCode::not_functional: return "not_functional";
  case ErrorCode::payload_budget: return "payload_budget";
  case ErrorCode::non_associative: return "non_associative";
  case ErrorCode::io: return "io";
  }
  return "unknown";
}

namespace {

void require_size(std::size_t actual, std::size_t expected, const char *what) {
  if (actual != expected) {
    throw Error(ErrorCode::dimension_mismatch, std::string(what) + ": expected length " +
                                                   std::to_string(expected) + ", got " +
                                                   std::to_string(actual));
  }
}

} // namespace

Graph Graph::from_edges(std::size_t n, std::vector<Edge> edges, const GraphOptions &opts) {
  Graph g;
  g.n_ = n;
  const double max_allowed =
      opts.weight_exponent > 0 ? std::pow(static_cast<double>(std::max<std::size_t>(n, 1)),
                                          opts.weight_exponent)
                               : INFINITY;
  for (Edge &e : edges) {
    if (e.tail >= n || e.head >= n) {
      throw Error(ErrorCode::node_out_of_range, "edge endpoint out of range");
    }
    if (e.tail == e.head) {
      throw Error(ErrorCode::self_loop, "self-loop at node " + std::to_string(e.tail + 1));
    }
    if (!std::isfinite(e.weight) || e.weight < 1.0 || e.weight > max_allowed * (1 + 1e-12)) {
      throw Error(ErrorCode::weight_out_of_range,
                  "edge weight " + std::to_string(e.weight) + " outside [1, n^C]");
    }
    if (e.tail > e.head) std::swap(e.tail, e.head);
    g.max_weight_ = std::max(g.max_weight_, e.weight);
  }

  std::vector<EdgeId> order(edges.size());
  std::iota(order.begin(), order.end(), EdgeId{0});
  std::sort(order.begin(), order.end(), [&](EdgeId a, EdgeId b) {
    return std::tie(edges[a].tail, edges[a].head) < std::tie(edges[b].tail, edges[b].head);
  });
  for (std::size_t i = 1; i < order.size(); ++i) {
    const Edge &a = edges[order[i - 1]];
    const Edge &b = edges[order[i]];
    if (a.tail == b.tail && a.head == b.head) {
      throw Error(ErrorCode::duplicate_edge, "duplicate edge " + std::to_string(a.tail + 1) +
                                                 " " + std::to_string(a.head + 1));
    }
  }
  g.edges_ = std::move(edges);

  g.offsets_.assign(n + 1, 0);
  for (const Edge &e : g.edges_) {
    ++g.offsets_[e.tail + 1];
    ++g.offsets_[e.head + 1];
  }
  std::partial_sum(g.offsets_.begin(), g.offsets_.end(), g.offsets_.begin());
  g.adjacency_.resize(2 * g.edges_.size());
  std::vector<std::size_t> fill(g.offsets_.begin(), g.offsets_.end() - 1);
  for (EdgeId id = 0; id < g.edges_.size(); ++id) {
    const Edge &e = g.edges_[id];
    g.adjacency_[fill[e.tail]++] = {e.head, id};
    g.adjacency_[fill[e.head]++] = {e.tail, id};
  }

  if (opts.require_connected && n > 0) {
    std::vector<char> seen(n, 0);
    std::vector<NodeId> stack{0};
    seen[0] = 1;
    std::size_t reached = 1;
    while (!stack.empty()) {
      NodeId v = stack.back();
      stack.pop_back();
      for (const Incidence &inc : g.neighbors(v)) {
        if (!seen[inc.neighbor]) {
          seen[inc.neighbor] = 1;
          ++reached;
          stack.push_back(inc.neighbor);
        }
      }
    }
    if (reached != n) {
      throw Error(ErrorCode::disconnected, "graph is not connected (" + std::to_string(reached) +
                                               " of " + std::to_string(n) + " nodes reachable)");
    }
  }
  return g;
}

EdgeId Graph::find_edge(NodeId u, NodeId v) const {
  if (degree(u) > degree(v)) std::swap(u, v);
  for (const Incidence &inc : neighbors(u))
    if (inc.neighbor == v) return inc.edge;
  return kNoEdge;
}

Graph parse_graph(std::string_view text, const GraphOptions &opts) {
  std::istringstream in{std::string(text)};
  long long n = -1, m = -1;
  if (!(in >> n >> m) || n < 0 || m < 0) {
    throw Error(ErrorCode::parse, "expected header \"n m\"");
  }
  std::vector<Edge> edges;
  edges.reserve(static_cast<std::size_t>(m));
  for (long long i = 0; i < m; ++i) {
    long long u = 0, v = 0;
    double w = 0;
    if (!(in >> u >> v >> w)) {
      throw Error(ErrorCode::parse, "expected edge line " + std::to_string(i + 1) + " \"u v w\"");
    }
    if (u < 1 || v < 1 || u > n || v > n) {
      throw Error(ErrorCode::node_out_of_range,
                  "edge line " + std::to_string(i + 1) + ": node id out of range");
    }
    edges.push_back({static_cast<NodeId>(u - 1), static_cast<NodeId>(v - 1), w});
  }
  std::string rest;
  if (in >> rest) throw Error(ErrorCode::parse, "trailing content after " + std::to_string(m) + " edges");
  return Graph::from_edges(static_cast<std::size_t>(n), std::move(edges), opts);
}

Graph load_graph(const std::string &path, const GraphOptions &opts) {
  std::ifstream file(path);
  if (!file) throw Error(ErrorCode::io, "cannot open " + path);
  std::stringstream buffer;
  buffer << file.rdbuf();
  return parse_graph(buffer.str(), opts);
}

std::string format_graph(const Graph &g) {
  std::ostringstream out;
  out.precision(17);
  out << g.num_nodes() << ' ' << g.num_edges() << '\n';
  for (const Edge &e : g.edges()) out << e.tail + 1 << ' ' << e.head + 1 << ' ' << e.weight << '\n';
  return out.str();
}

NodeVector apply_B(const Graph &g, const EdgeVector &f) {
  require_size(f.size(), g.num_edges(), "apply_B");
  NodeVector out(g.num_nodes());
  for (EdgeId e = 0; e < g.num_edges(); ++e) {
    out[g.edge(e).tail] += f[e];
    out[g.edge(e).head] -= f[e];
  }
  return out;
}

EdgeVector apply_Bt(const Graph &g, const NodeVector &phi) {
  require_size(phi.size(), g.num_nodes(), "apply_Bt");
  EdgeVector out(g.num_edges());
  for (EdgeId e = 0; e < g.num_edges(); ++e) out[e] = phi[g.edge(e).tail] - phi[g.edge(e).head];
  return out;
}

EdgeVector apply_W(const Graph &g, const EdgeVector &f) {
  require_size(f.size(), g.num_edges(), "apply_W");
  EdgeVector out(g.num_edges());
  for (EdgeId e = 0; e < g.num_edges(); ++e) out[e] = g.weight(e) * f[e];
  return out;
}

EdgeVector apply_W_inverse(const Graph &g, const EdgeVector &f) {
  require_size(f.size(), g.num_edges(), "apply_W_inverse");
  EdgeVector out(g.num_edges());
  for (EdgeId e = 0; e < g.num_edges(); ++e) out[e] = f[e] / g.weight(e);
  return out;
}

double flow_cost(const Graph &g, const EdgeVector &f) {
  require_size(f.size(), g.num_edges(), "flow_cost");
  double cost = 0.0;
  for (EdgeId e = 0; e < g.num_edges(); ++e) cost += g.weight(e) * std::abs(f[e]);
  return cost;
}

double dual_feasibility(const Graph &g, const NodeVector &phi) {
  require_size(phi.size(), g.num_nodes(), "dual_feasibility");
  double worst = 0.0;
  for (const Edge &e : g.edges()) worst = std::max(worst, std::abs(phi[e.tail] - phi[e.head]) / e.weight);
  return worst;
}

Demand pair_demand(std::size_t n, NodeId s, NodeId t) {
  Demand d(n);
  d[s] += 1.0;
  d[t] -= 1.0;
  return d;
}

} // namespace lddflow
