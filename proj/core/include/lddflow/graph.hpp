#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lddflow/error.hpp"
#include "lddflow/vectors.hpp"

namespace lddflow {

/// An undirected edge stored in canonical orientation: tail < head.
struct Edge {
  NodeId tail;
  NodeId head;
  double weight;

  NodeId other(NodeId v) const { return v == tail ? head : tail; }
};

struct GraphOptions {
  /// Weights must lie in [1, n^weight_exponent]. Ignored when zero.
  double weight_exponent = 4.0;
  bool require_connected = true;
};

/// Half-edge in the adjacency structure.
struct Incidence {
  NodeId neighbor;
  EdgeId edge;
};

/// Simple connected weighted undirected graph with stable dense edge ids.
///
/// Nodes are 0-based internally; the text formats use 1-based ids. The
/// incidence matrix B has B(tail,e) = +1 and B(head,e) = -1 for every edge.
/// Instances are immutable once built.
class Graph {
public:
  Graph() = default;

  /// Validates and canonicalizes an edge list. Endpoints may come in either
  /// order. Throws lddflow::Error on self-loops, duplicates, bad weights or
  /// (by default) a disconnected graph.
  static Graph from_edges(std::size_t n, std::vector<Edge> edges, const GraphOptions &opts = {});

  std::size_t num_nodes() const { return n_; }
  std::size_t num_edges() const { return edges_.size(); }
  const Edge &edge(EdgeId e) const { return edges_[e]; }
  std::span<const Edge> edges() const { return edges_; }
  std::span<const Incidence> neighbors(NodeId v) const {
    return {adjacency_.data() + offsets_[v], adjacency_.data() + offsets_[v + 1]};
  }
  std::size_t degree(NodeId v) const { return offsets_[v + 1] - offsets_[v]; }
  double weight(EdgeId e) const { return edges_[e].weight; }
  double max_weight() const { return max_weight_; }

  /// Edge id joining u and v, or kNoEdge.
  EdgeId find_edge(NodeId u, NodeId v) const;

private:
  std::size_t n_ = 0;
  std::vector<Edge> edges_;
  std::vector<std::size_t> offsets_{0};
  std::vector<Incidence> adjacency_;
  double max_weight_ = 0.0;
};

/// Parses the edge-list format: a header "n m" followed by m lines "u v w".
Graph parse_graph(std::string_view text, const GraphOptions &opts = {});
Graph load_graph(const std::string &path, const GraphOptions &opts = {});
std::string format_graph(const Graph &g);

NodeVector apply_B(const Graph &g, const EdgeVector &f);
EdgeVector apply_Bt(const Graph &g, const NodeVector &phi);
EdgeVector apply_W(const Graph &g, const EdgeVector &f);
EdgeVector apply_W_inverse(const Graph &g, const EdgeVector &f);

/// ||W f||_1.
double flow_cost(const Graph &g, const EdgeVector &f);

/// max_e |phi_u - phi_v| / w_e; the potential is dual feasible iff this is <= 1.
double dual_feasibility(const Graph &g, const NodeVector &phi);

/// Unit demand from s to t.
Demand pair_demand(std::size_t n, NodeId s, NodeId t);

} // namespace lddflow
