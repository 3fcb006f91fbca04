#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "lddflow/transshipment.hpp"

namespace lddflow {

struct EssspOptions {
  /// Per-level transshipment accuracy eps' = c * eps / log2 n.
  double c = 0.25;
  /// Outgoing flows at most noise * ||f||_inf are treated as zero when sampling.
  double noise = 1e-12;
  /// Recursion depth cap: depth_factor * ceil(log2 n) + depth_offset levels.
  unsigned depth_factor = 4;
  unsigned depth_offset = 4;
  /// Routing on contracted levels uses default_routing_params with these.
  double g_factor = 4.0;
  unsigned g_cap = 64;
  std::size_t alpha_pairs = 64;
  /// Competitiveness estimate for the top-level routing; estimated when unset.
  std::optional<double> alpha_hat;
  TransshipmentOptions transshipment;
  CycleOptions cycles;
};

struct EssspTree {
  std::vector<char> in_tree; // per edge of the input graph
  unsigned depth = 0;        // recursion levels used, the last one included
  std::uint64_t mwu_iterations = 0;
};

/// Random spanning tree whose demand-weighted source distances are within
/// (1+eps) of the true ones in expectation. d_v >= 0 off the source.
EssspTree esssp(MinorNetwork &net, const RoutingOperator &R, NodeId s, const Demand &d, double eps,
                std::uint64_t seed, const EssspOptions &options = {});

/// The same algorithm with the top level's flow supplied by the caller
/// (B flow = d). Deeper levels solve their own transshipments. With a fixed
/// routing and options.alpha_hat set, the top-level flow of esssp() does not
/// depend on the seed, so both functions return the same tree when given it.
EssspTree esssp_from_flow(MinorNetwork &net, NodeId s, const Demand &d, const EdgeVector &flow, double eps,
                          std::uint64_t seed, const EssspOptions &options = {});

struct SsspOptions {
  /// Loop cap c_loop * ceil(log2 n) iterations (at least c_loop).
  double c_loop = 8.0;
  /// Potential accuracy eps * phi_fraction.
  double phi_fraction = 0.1;
  /// Feed the potential solve's flow to ESSSP as its top-level flow. The
  /// tree parameter then becomes eps * phi_fraction * log2 n / c.
  bool reuse_flow = true;
  /// Without reuse, the ESSSP parameter is esssp_factor * eps / log2 n.
  double esssp_factor = 1.0;
  std::optional<double> alpha_hat;
  EssspOptions esssp;
  TransshipmentOptions transshipment;
};

struct SsspResult {
  std::vector<NodeId> parent; // parent[s] == s
  std::vector<EdgeId> parent_edge;
  std::vector<double> dist;
  /// Final potential phi; phi(v) <= dist_G(s, v) whenever the inner
  /// potentials are dual feasible.
  std::vector<double> potential;
  std::uint64_t rounds = 0;
  unsigned loop_iterations = 0;
  std::uint64_t mwu_iterations = 0;
  /// Filled by callers that compare against exact distances.
  std::optional<double> stretch_max;
};

/// Tree with dist_T(s, v) <= (1+eps) dist_G(s, v) for every v.
SsspResult sssp(MinorNetwork &net, const RoutingOperator &R, NodeId s, double eps, std::uint64_t seed,
                const SsspOptions &options = {});

/// max over v != s of dist[v] / exact[v] (1 when there is no such v).
double max_stretch(const std::vector<double> &dist, const std::vector<double> &exact);

nlohmann::json to_json(const SsspResult &r);

} // namespace lddflow
