#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "lddflow/minor_network.hpp"
#include "lddflow/primitives.hpp"

namespace lddflow {

/// Partition of the nodes into connected clusters, each with a center and a
/// shortest-path tree toward it.
struct LddPartition {
  double rho = 0.0;
  std::vector<std::uint32_t> component_of; // dense ids, ordered by center id
  std::vector<NodeId> center;              // per component
  /// Shortest-path forest inside the clusters, rooted at the centers. Its
  /// parent_edge is the per-node parent edge (kNoEdge at centers) and its
  /// depth_dist the distance to the center.
  RootedForest tree;

  std::size_t num_nodes() const { return component_of.size(); }
  std::size_t num_components() const { return center.size(); }
  EdgeId sp_parent(NodeId v) const { return tree.parent_edge[v]; }
  double root_dist(NodeId v) const { return tree.depth_dist[v]; }
};

struct LddOptions {
  /// Shift rate is quality_constant * ln(n) / rho.
  double quality_constant = 4.0;
};

/// Exponential-shift clustering: every node u draws a shift delta_u from an
/// exponential distribution truncated at rho, and v joins the cluster of the
/// u maximizing delta_u - dist(u, v) (ties by smaller u). Cluster radii are at
/// most rho on every sample. When rho is at least (n-1) * w_max the whole
/// graph is one cluster around a uniformly random center.
///
/// The shifted ball growing runs as one centralized multi-source Dijkstra and
/// charges ldd_round_charge(n) rounds to the network.
LddPartition sample_ldd(MinorNetwork &net, double rho, std::uint64_t seed, const LddOptions &options = {});

/// Rounds charged per sampled decomposition: (ceil(log2 n) + 1)^2.
std::uint64_t ldd_round_charge(std::size_t n);

/// Structural check of every partition property: forest shape, connectivity,
/// root distances equal to shortest-path distances inside the cluster, and
/// the radius bound. Returns one message per violation.
std::vector<std::string> verify_ldd(const Graph &g, const LddPartition &p, double rel_tol = 1e-9);

nlohmann::json to_json(const LddPartition &p);
LddPartition ldd_from_json(const Graph &g, const nlohmann::json &j);

} // namespace lddflow
