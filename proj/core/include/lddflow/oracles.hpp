#pragma once

#include <vector>

#include "lddflow/graph.hpp"

/// Exact centralized reference solvers. They never touch the round
/// simulator and are meant for verification only.
namespace lddflow::oracle {

struct ShortestPaths {
  std::vector<double> dist;
  std::vector<NodeId> parent;      // parent[s] == s
  std::vector<EdgeId> parent_edge; // kNoEdge at s
};

ShortestPaths dijkstra(const Graph &g, NodeId source);
std::vector<double> bellman_ford(const Graph &g, NodeId source);

struct SpanningTree {
  double weight = 0.0;
  std::vector<char> in_tree; // per edge
};

/// Minimum spanning tree under the key (weight, edge id).
SpanningTree kruskal(const Graph &g);

/// Leader (minimum node id) per node of the components of the masked subgraph.
std::vector<NodeId> union_find_components(const Graph &g, const std::vector<char> &mask);

struct Transshipment {
  double cost = 0.0;
  EdgeVector flow;
};

/// Optimal transshipment: shortest-path distances between supply and demand
/// nodes followed by an exact transportation solve (successive shortest
/// augmenting paths).
Transshipment exact_transshipment(const Graph &g, const Demand &d);

struct TreeSums {
  NodeVector desc; // inclusive subtree sums
  NodeVector anc;  // strict ancestor sums
};

/// Subtree and ancestor sums by recursive depth-first search on parent pointers.
TreeSums dfs_tree_sums(const std::vector<NodeId> &parent, const NodeVector &x);

/// Weighted depth of every node in a forest given by parent pointers.
std::vector<double> tree_depths(const Graph &g, const std::vector<NodeId> &parent,
                                const std::vector<EdgeId> &parent_edge);

/// Nodes lying on a cycle of the functional graph v -> successor[v], found by
/// walking n steps from every node.
std::vector<char> pointer_chasing_cycles(const std::vector<NodeId> &successor);

} // namespace lddflow::oracle
