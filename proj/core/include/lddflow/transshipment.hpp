#pragma once

#include <cstdint>

#include <nlohmann/json_fwd.hpp>

#include "lddflow/routing.hpp"

namespace lddflow {

struct MwuOptions {
  /// Iteration budget T = ceil(c_T * alpha_hat^2 * eps^-2 * ln(2m)).
  double c_T = 8.0;
  /// Hard limit on executed iterations; reaching it without an answer throws
  /// ErrorCode::iteration_cap.
  std::uint64_t iteration_cap = 1'000'000;
  /// Stop as soon as the running average already certifies a potential with
  /// d^T phi = t and dual feasibility at most 1.
  bool early_potential = true;
};

struct MwuOutcome {
  enum class Kind { flow, potential } kind = Kind::flow;
  /// Flow branch: ||W f||_1 <= t and ||W R (B f - d)||_1 < eps * t.
  EdgeVector flow;
  /// Potential branch: d^T phi = t.
  NodeVector potential;
  std::uint64_t iterations = 0;
  /// ||W R (B f - d)||_1 for flows.
  double routed_residual = 0.0;
  /// ||W^-1 B^T phi||_inf for potentials.
  double dual_feasibility = 0.0;
  /// Certified lower bound on the optimum: t / max(1, dual_feasibility) for
  /// potentials, zero otherwise.
  double lower_bound = 0.0;
};

/// One feasibility check of scale t by multiplicative weights over the 2m
/// signed edge experts, preconditioned by R.
MwuOutcome mwu_check(MinorNetwork &net, const RoutingOperator &R, const Demand &d, double t, double eps,
                     double alpha_hat, const MwuOptions &options = {});

struct TransshipmentOptions {
  MwuOptions mwu;
  /// Upper limit on feasibility checks in descent and bisection together.
  unsigned max_checks = 400;
};

struct TransshipmentSolution {
  EdgeVector flow;
  NodeVector potential;
  double cost = 0.0;  // ||W f||_1
  double dual = 0.0;  // d^T phi
  std::uint64_t rounds = 0;
  std::uint64_t iterations = 0; // MWU iterations over all checks
  unsigned checks = 0;
  double t_low = 0.0;  // certified: t_low <= OPT
  double t_high = 0.0; // flow found at this scale before repair
};

/// (1+eps)-approximate flow and potential pair: B f = d, potential dual
/// feasible, and ||W f||_1 <= (1+eps) d^T phi.
TransshipmentSolution solve_transshipment(MinorNetwork &net, const RoutingOperator &R, const Demand &d, double eps,
                                          double alpha_hat, const TransshipmentOptions &options = {});

/// f + R (d - B f), which meets the demand exactly.
EdgeVector repair_and_finalize(MinorNetwork &net, const RoutingOperator &R, const EdgeVector &f, const Demand &d);

nlohmann::json to_json(const TransshipmentSolution &s);

} // namespace lddflow
