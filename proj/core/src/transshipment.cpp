#include "lddflow/transshipment.hpp"

#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>

#include "lddflow/io.hpp"

namespace lddflow {

namespace {

void check_demand(const Graph &g, const Demand &d) {
  if (d.size() != g.num_nodes()) throw Error(ErrorCode::dimension_mismatch, "demand length does not match the graph");
  if (!is_proper(d)) throw Error(ErrorCode::improper_demand, "demand does not sum to zero");
}

} // namespace

MwuOutcome mwu_check(MinorNetwork &net, const RoutingOperator &R, const Demand &d, double t, double eps,
                     double alpha_hat, const MwuOptions &options) {
  const Graph &g = net.graph();
  check_demand(g, d);
  if (!(t > 0.0)) throw Error(ErrorCode::invalid_argument, "mwu_check: t must be positive");
  if (!(eps > 0.0)) throw Error(ErrorCode::invalid_argument, "mwu_check: eps must be positive");
  if (!(alpha_hat >= 1.0)) throw Error(ErrorCode::invalid_argument, "mwu_check: alpha_hat must be at least 1");

  const std::size_t m = g.num_edges();
  const double delta = eps / (2.0 * alpha_hat);
  const double budget = std::ceil(options.c_T * alpha_hat * alpha_hat / (eps * eps) * std::log(2.0 * std::max<std::size_t>(m, 1)));
  const auto T = static_cast<std::uint64_t>(std::max(1.0, budget));

  MwuOutcome out;
  const NodeVector scaled_demand = (1.0 / t) * d;
  EdgeVector log_plus(m), log_minus(m);
  EdgeVector p_plus(m), p_minus(m), q(m), wy(m), a(m);
  NodeVector sum_z(g.num_nodes());
  EdgeVector sum_a(m);

  for (std::uint64_t k = 1;; ++k) {
    // Joint normalization over the 2m experts.
    double top = -INFINITY;
    for (std::size_t e = 0; e < m; ++e) top = std::max({top, log_plus[e], log_minus[e]});
    double mass = 0.0;
    for (std::size_t e = 0; e < m; ++e) {
      p_plus[e] = std::exp(log_plus[e] - top);
      p_minus[e] = std::exp(log_minus[e] - top);
      mass += p_plus[e] + p_minus[e];
    }
    for (std::size_t e = 0; e < m; ++e) q[e] = (p_plus[e] - p_minus[e]) / (mass * g.weight(e));

    // r = W R (B q + d / t).
    NodeVector demand = apply_B(net, q);
    demand += scaled_demand;
    EdgeVector r = R.route(demand, &net);
    for (std::size_t e = 0; e < m; ++e) r[e] *= g.weight(e);
    const double r_norm = norm(net, r, 1.0);
    if (r_norm < eps) {
      out.kind = MwuOutcome::Kind::flow;
      out.flow = -t * q;
      out.routed_residual = t * r_norm;
      out.iterations = k - 1;
      return out;
    }
    if (k > T) break;
    if (k > options.iteration_cap)
      throw Error(ErrorCode::iteration_cap, "mwu_check exceeded the iteration cap of " +
                                                std::to_string(options.iteration_cap));

    // y = -sign(r) with sign(0) = +1; the loss of expert (+-e) is +-a_e.
    for (std::size_t e = 0; e < m; ++e) wy[e] = (r[e] >= 0.0 ? -1.0 : 1.0) * g.weight(e);
    const NodeVector z = R.route_transpose(wy, &net);
    const EdgeVector btz = apply_Bt(net, z);
    for (std::size_t e = 0; e < m; ++e) {
      a[e] = btz[e] / g.weight(e);
      log_plus[e] += delta * a[e];
      log_minus[e] -= delta * a[e];
    }
    sum_z += z;
    sum_a += a;
    out.iterations = k;

    if (options.early_potential) {
      // phi = -sum_z / k has d^T phi = value and dual feasibility ||sum_a||_inf / k.
      const double value = -dot(net, d, sum_z) / static_cast<double>(k);
      const double feas = norm(net, sum_a, INFINITY) / static_cast<double>(k);
      if (value > 0.0 && value >= t * feas) {
        out.kind = MwuOutcome::Kind::potential;
        out.potential = (-t / (value * static_cast<double>(k))) * sum_z;
        out.dual_feasibility = feas * t / value;
        out.lower_bound = t;
        return out;
      }
    }
  }

  // Budget exhausted: the averaged strategy, scaled so that d^T phi = t.
  out.kind = MwuOutcome::Kind::potential;
  const double k = static_cast<double>(out.iterations);
  const double value = -dot(net, d, sum_z) / k;
  const double feas = norm(net, sum_a, INFINITY) / k;
  if (value > 0.0) {
    out.potential = (-t / (value * k)) * sum_z;
    out.dual_feasibility = feas * t / value;
    out.lower_bound = t / std::max(1.0, out.dual_feasibility);
  } else {
    out.potential = NodeVector(g.num_nodes());
    out.lower_bound = 0.0;
  }
  return out;
}

EdgeVector repair_and_finalize(MinorNetwork &net, const RoutingOperator &R, const EdgeVector &f, const Demand &d) {
  const NodeVector gap = d - apply_B(net, f);
  return f + R.route(gap, &net);
}

TransshipmentSolution solve_transshipment(MinorNetwork &net, const RoutingOperator &R, const Demand &d, double eps,
                                          double alpha_hat, const TransshipmentOptions &options) {
  const Graph &g = net.graph();
  check_demand(g, d);
  if (!(eps > 0.0 && eps < 1.0)) throw Error(ErrorCode::invalid_argument, "eps must lie in (0, 1)");
  const std::uint64_t start = net.rounds();
  TransshipmentSolution sol;
  sol.potential = NodeVector(g.num_nodes());
  if (d.norm_inf() == 0.0) {
    sol.flow = EdgeVector(g.num_edges());
    sol.rounds = net.rounds() - start;
    return sol;
  }

  // Splitting eps as (1+eps')^2 = 1+eps: the bracket costs one factor and the
  // routed residual of the flow branch the other.
  const double inner = std::sqrt(1.0 + eps) - 1.0;
  auto check = [&](double t) {
    if (sol.checks >= options.max_checks)
      throw Error(ErrorCode::iteration_cap, "transshipment search exceeded " + std::to_string(options.max_checks) + " checks");
    ++sol.checks;
    MwuOutcome o = mwu_check(net, R, d, t, inner, alpha_hat, options.mwu);
    sol.iterations += o.iterations;
    return o;
  };

  EdgeVector best_flow;
  NodeVector best_potential(g.num_nodes());
  double lo = 0.0, hi = 0.0;
  double t = d.norm1() * static_cast<double>(g.num_nodes()) * g.max_weight();
  // Descend while flows come back; ascend if the very first answer is a potential.
  while (true) {
    MwuOutcome o = check(t);
    if (o.kind == MwuOutcome::Kind::flow) {
      hi = t;
      best_flow = std::move(o.flow);
      if (lo > 0.0) break;
      t *= (1.0 + inner) / 2.0;
    } else {
      if (o.lower_bound > lo) {
        lo = o.lower_bound;
        best_potential = std::move(o.potential);
      }
      if (hi > 0.0) break;
      t *= 2.0;
    }
  }
  while (hi > (1.0 + inner) * lo) {
    const double mid = 0.5 * (lo + hi);
    MwuOutcome o = check(mid);
    if (o.kind == MwuOutcome::Kind::flow) {
      hi = mid;
      best_flow = std::move(o.flow);
    } else if (o.lower_bound > lo) {
      lo = o.lower_bound;
      best_potential = std::move(o.potential);
    } else {
      break; // an uncertified potential cannot narrow the bracket
    }
  }
  sol.t_low = lo;
  sol.t_high = hi;

  sol.flow = repair_and_finalize(net, R, best_flow, d);
  const EdgeVector slopes = apply_Bt(net, best_potential);
  double feas = 0.0;
  for (EdgeId e = 0; e < g.num_edges(); ++e) feas = std::max(feas, std::abs(slopes[e]) / g.weight(e));
  sol.potential = (1.0 / std::max(1.0, feas)) * best_potential;
  sol.cost = flow_cost(g, sol.flow);
  sol.dual = d.dot(sol.potential);
  sol.rounds = net.rounds() - start;
  return sol;
}

nlohmann::json to_json(const TransshipmentSolution &s) {
  return {{"flow", to_json(s.flow)},  {"potential", to_json(s.potential)}, {"cost", s.cost},
          {"dual", s.dual},           {"rounds", s.rounds},                  {"iterations", s.iterations}};
}

} // namespace lddflow
