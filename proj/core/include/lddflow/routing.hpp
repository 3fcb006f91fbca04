#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "lddflow/ldd.hpp"

namespace lddflow {

/// Exponent C in the level constraint rho^i_max >= n^(C+1).
inline constexpr double kRoutingExponent = 4.0;

struct RoutingParams {
  double rho = 2.0;      // level-1 radius; level i uses rho^i
  unsigned i_max = 1;    // number of LDD levels
  unsigned g = 1;        // decompositions per level
  std::uint64_t seed = 1;
  LddOptions ldd;
};

/// Desk-scale defaults: i_max = max(1, round(log2(n)^(1/4))), rho the
/// smallest integer with rho^i_max >= max(n^(C+1), n * w_max), and
/// g = max(1, ceil(g_factor * log2 n)) capped at g_cap.
RoutingParams default_routing_params(const Graph &g, std::uint64_t seed, double g_factor = 4.0,
                                     unsigned g_cap = 64);

/// Throws invalid_argument unless rho >= 2, i_max >= 1, g >= 1 and
/// rho^i_max >= n^(C+1).
void validate_routing_params(const RoutingParams &params, std::size_t n);

/// A decomposition prepared for repeated evaluation.
struct RoutedPartition {
  LddPartition partition;
  /// Rounds of one distributed subtree-sum evaluation on this forest,
  /// measured by running the pipeline once on a scratch network.
  std::uint64_t eval_rounds = 0;
};

struct RoutingLevel {
  double radius = 0.0;
  std::vector<RoutedPartition> partitions;
};

/// Per-level trace of route(): the residual demand before each level.
struct LevelTrace {
  double radius = 0.0;
  NodeVector demand;   // d_{i-1}
  EdgeVector flow;     // f_i
};

/// Non-root nodes of a rooted forest in top-down order with their parent
/// edge and its orientation (+1 when the node is the edge's tail).
struct TreePlan {
  TreePlan() = default;
  TreePlan(const Graph &g, const RootedForest &forest);

  std::vector<NodeId> node, parent;
  std::vector<EdgeId> edge;
  std::vector<double> sign;

  /// f += scale * R(P) d; `work` is scratch of length n.
  void route_into(const NodeVector &d, double scale, EdgeVector &f, std::vector<double> &work) const;
  /// y += scale * R(P)^T c.
  void transpose_into(const EdgeVector &c, double scale, NodeVector &y, std::vector<double> &work) const;
};

/// Composite l1-oblivious routing built from LDD levels and a final spanning
/// tree. Both R d and R^T c are evaluated matrix-free.
class RoutingOperator {
public:
  RoutingOperator() = default;
  RoutingOperator(std::shared_ptr<const Graph> graph, RoutingParams params, std::vector<RoutingLevel> levels,
                  RootedForest final_tree);

  const Graph &graph() const { return *graph_; }
  const RoutingParams &params() const { return params_; }
  const std::vector<RoutingLevel> &levels() const { return levels_; }
  const RootedForest &final_tree() const { return final_tree_.partition.tree; }

  /// Flow f = R d with B f = d for every proper d. When a network is given,
  /// incidence products run as rounds on it and tree evaluations are charged.
  EdgeVector route(const Demand &d, MinorNetwork *net = nullptr) const;
  /// R^T c, the adjoint of route.
  NodeVector route_transpose(const EdgeVector &c, MinorNetwork *net = nullptr) const;

  /// route() together with the demand entering each level; the last entry is
  /// the final tree step.
  std::vector<LevelTrace> trace_route(const Demand &d) const;

  /// Rounds one route() or route_transpose() call charges.
  std::uint64_t rounds_per_application() const;

private:
  friend RoutingOperator routing_from_json(const Graph &g, const nlohmann::json &j);

  std::shared_ptr<const Graph> graph_;
  RoutingParams params_;
  std::vector<RoutingLevel> levels_;
  RoutedPartition final_tree_;
  std::vector<std::vector<TreePlan>> plans_;
  TreePlan final_plan_;
};

/// Samples g LDDs of radius rho^i for every level i and roots the minimum
/// spanning tree at node 0. Rounds accrue on `net`.
RoutingOperator build_routing(MinorNetwork &net, const RoutingParams &params);

/// Upper bound asserted on build_routing's rounds:
/// g * i_max * (ceil(log2 n) + 1)^kBuildRoundExponent * kBuildRoundConstant.
inline constexpr unsigned kBuildRoundExponent = 3;
inline constexpr unsigned kBuildRoundConstant = 2;
std::uint64_t build_round_bound(const RoutingParams &params, std::size_t n);

/// Routing along one decomposition: each node sends its demand to its center
/// along the shortest-path tree, so B (R(P) d) = d minus the per-cluster
/// totals placed at the centers.
EdgeVector ldd_route(const Graph &g, const LddPartition &p, const NodeVector &d);
/// (R(P)^T c)_v is the signed sum of c along the path from v to its center.
NodeVector ldd_route_transpose(const Graph &g, const LddPartition &p, const EdgeVector &c);

struct CompetitivenessEstimate {
  double max_ratio = 0.0;  // max over sampled pairs of ||W R d_st||_1 / dist(s, t)
  double alpha_hat = 2.0;  // max(2, safety * max_ratio)
  std::size_t pairs = 0;
};

/// Samples random pair demands and compares the routed cost with the exact
/// distance. This calibration step runs centrally and charges no rounds.
CompetitivenessEstimate estimate_competitiveness(const RoutingOperator &r, std::uint64_t seed,
                                                 std::size_t pairs = 64, double safety = 2.0);

/// Progress of one route() call. Entry i describes the demand d_i left after
/// i levels (entry 0 is d itself, the last one is what the final tree
/// carries) with Phi_i = ||d_i||_OPT + ||d_i||_1 * rho^i.
struct LevelDiagnostics {
  double scale = 1.0; // rho^i
  double demand_l1 = 0.0;
  std::optional<double> demand_opt;
  std::optional<double> potential;
};

/// `opt_norm` evaluates ||.||_OPT (an exact solver, small instances only);
/// without it only the l1 parts are reported.
std::vector<LevelDiagnostics> routing_diagnostics(const RoutingOperator &r, const Demand &d,
                                                  const std::function<double(const Demand &)> &opt_norm = {});
nlohmann::json to_json(const std::vector<LevelDiagnostics> &levels);

nlohmann::json to_json(const RoutingOperator &r);
RoutingOperator routing_from_json(const Graph &g, const nlohmann::json &j);

} // namespace lddflow
