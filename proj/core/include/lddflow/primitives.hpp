#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "lddflow/minor_network.hpp"

namespace lddflow {

/// Forest with every tree oriented toward its root.
struct RootedForest {
  std::vector<char> in_forest;      // per edge
  std::vector<NodeId> parent;       // parent[root] == root
  std::vector<EdgeId> parent_edge;  // kNoEdge at roots
  std::vector<double> depth_dist;   // weighted distance to the root

  std::size_t num_nodes() const { return parent.size(); }
  bool is_root(NodeId v) const { return parent[v] == v; }
};

/// Checks the structural invariants of a rooted forest against its graph.
/// Returns a description of the first violation, or an empty string.
std::string validate_forest(const Graph &g, const RootedForest &f, double rel_tol = 1e-9);

/// Leader (minimum node id) of every node's component in the subgraph given
/// by the edge mask. One round.
std::vector<NodeId> connected_components(MinorNetwork &net, const std::vector<char> &subgraph);

/// Minimum spanning tree (forest of the current minor) under the key
/// (weight, edge id). Returns an edge mask. Two rounds per phase and
/// ceil(log2 n) phases.
std::vector<char> mst_boruvka(MinorNetwork &net);

/// Orients the forest given by the edge mask toward the designated roots and
/// computes weighted root distances. Exactly one root per tree is required.
RootedForest root_forest(MinorNetwork &net, const std::vector<char> &forest,
                         const std::vector<char> &is_root, std::uint64_t seed);

struct SubtreeSums {
  /// Sum over the subtree of v, including v.
  NodeVector desc;
  /// Sum over the strict ancestors of v, root included.
  NodeVector anc;
};

/// Descendant and ancestor sums by random-mate tree contraction.
SubtreeSums subtree_sums(MinorNetwork &net, const RootedForest &forest, const NodeVector &x,
                         std::uint64_t seed);

/// Centralized evaluation of the same sums in linear time. Used where the
/// sums are needed many times on a fixed forest; callers charge the rounds
/// of one subtree_sums run per evaluation.
class TreeSweep {
public:
  TreeSweep() = default;
  explicit TreeSweep(const RootedForest &forest);

  std::size_t num_nodes() const { return parent_.size(); }
  NodeVector descendant_sums(const NodeVector &x) const;
  NodeVector ancestor_sums(const NodeVector &x) const;
  /// Top-down order (every node after its parent).
  const std::vector<NodeId> &order() const { return order_; }

private:
  std::vector<NodeId> parent_;
  std::vector<NodeId> order_;
};

/// Out-arc of a node in a functional graph; edge == kNoEdge is a self-loop.
struct Arc {
  NodeId from;
  EdgeId edge;
};

struct CycleOptions {
  double sample_probability = 0.1;
  /// Walk cutoff is walk_factor * ceil(log2 n) + walk_offset.
  unsigned walk_factor = 4;
  unsigned walk_offset = 10;
};

/// Marks the nodes whose out-arc lies on a directed cycle. `arcs` must hold
/// exactly one arc per node.
std::vector<char> find_cycles(MinorNetwork &net, std::span<const Arc> arcs, std::uint64_t seed,
                              const CycleOptions &options = {});

unsigned ceil_log2(std::size_t n);

} // namespace lddflow
