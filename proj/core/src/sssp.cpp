#include "lddflow/sssp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include <nlohmann/json.hpp>

#include "lddflow/primitives.hpp"

namespace lddflow {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double log2n(std::size_t n) { return std::log2(static_cast<double>(std::max<std::size_t>(n, 2))); }

/// What every supernode of H learns about itself in one consensus round.
struct ComponentSummary {
  double cycle_weight = 0.0;
  double demand = 0.0;
  EdgeId cut_edge = kNoEdge; // smallest cycle edge id
  NodeId cut_node = kNoNode; // owner of the arc that is dropped
};

AggregationOp<ComponentSummary> summary_op() {
  AggregationOp<ComponentSummary> op{
      ComponentSummary{}, [](const ComponentSummary &a, const ComponentSummary &b) {
        ComponentSummary r{a.cycle_weight + b.cycle_weight, a.demand + b.demand, a.cut_edge, a.cut_node};
        if (std::pair{b.cut_edge, b.cut_node} < std::pair{a.cut_edge, a.cut_node}) {
          r.cut_edge = b.cut_edge;
          r.cut_node = b.cut_node;
        }
        return r;
      }};
  op.equal = [](const ComponentSummary &a, const ComponentSummary &b) {
    auto close = [](double x, double y) { return std::abs(x - y) <= 1e-9 * std::max({1.0, std::abs(x), std::abs(y)}); };
    return close(a.cycle_weight, b.cycle_weight) && close(a.demand, b.demand) && a.cut_edge == b.cut_edge &&
           a.cut_node == b.cut_node;
  };
  return op;
}

struct EssspRun {
  const EssspOptions &opts;
  std::uint64_t seed;
  unsigned depth_cap;
  unsigned deepest = 0;
  std::uint64_t mwu_iterations = 0;

  /// Tree edges of the level graph, as a mask over its edges.
  /// `given` replaces the level's own transshipment when set.
  std::vector<char> solve(MinorNetwork &net, const RoutingOperator *R, double alpha_hat, NodeId s,
                          const Demand &d, double eps, unsigned depth, const EdgeVector *given = nullptr) {
    const Graph &g = net.graph();
    const std::size_t n = g.num_nodes(), m = g.num_edges();
    deepest = std::max(deepest, depth);
    if (depth > depth_cap) {
      throw Error(ErrorCode::depth_cap, "esssp recursion exceeded " + std::to_string(depth_cap) + " levels");
    }
    if (n == 1) return {};

    double off_source = 0.0;
    for (NodeId v = 0; v < n; ++v)
      if (v != s) off_source += d[v];
    // Nothing left to serve: any spanning tree meets the objective.
    if (off_source <= 1e-12 * std::max(1.0, d.norm1())) return mst_boruvka(net);

    const double eps_level = opts.c * eps / log2n(n);
    const double eps_next = (1 + eps) / (1 + 3 * eps_level) - 1;
    if (!(eps_next > 0)) {
      throw Error(ErrorCode::invalid_argument, "esssp accuracy budget exhausted at depth " + std::to_string(depth));
    }

    EdgeVector computed;
    if (!given) {
      const TransshipmentSolution sol = solve_transshipment(net, *R, d, eps_level, alpha_hat, opts.transshipment);
      mwu_iterations += sol.iterations;
      computed = sol.flow;
    }
    const EdgeVector &f = given ? *given : computed;

    // Every node but s samples an out-edge with positive outgoing flow.
    double fmax = 0.0;
    for (double x : f) fmax = std::max(fmax, std::abs(x));
    const double floor = opts.noise * fmax;
    Rng rng(derive_seed(seed, {depth, 0x5a3}));
    std::vector<Arc> arcs(n);
    std::vector<std::pair<EdgeId, double>> choices;
    for (NodeId u = 0; u < n; ++u) {
      arcs[u] = {u, kNoEdge};
      if (u == s) continue;
      choices.clear();
      double total = 0.0;
      for (const Incidence &inc : g.neighbors(u)) {
        const double out = g.edge(inc.edge).tail == u ? f[inc.edge] : -f[inc.edge];
        if (out > floor) {
          choices.push_back({inc.edge, out});
          total += out;
        }
      }
      if (choices.empty()) continue;
      double pick = rng.uniform() * total;
      arcs[u].edge = choices.back().first;
      for (const auto &[e, out] : choices) {
        if (pick < out) {
          arcs[u].edge = e;
          break;
        }
        pick -= out;
      }
    }

    const std::vector<char> on_cycle = find_cycles(net, arcs, derive_seed(seed, {depth, 0xc1c}), opts.cycles);

    // Distances to the cycle inside each component.
    std::vector<char> hanging(m, 0), sampled(m, 0);
    for (NodeId u = 0; u < n; ++u) {
      if (arcs[u].edge == kNoEdge) continue;
      sampled[arcs[u].edge] = 1;
      if (!on_cycle[u]) hanging[arcs[u].edge] = 1;
    }
    const RootedForest to_cycle = root_forest(net, hanging, on_cycle, derive_seed(seed, {depth, 0xf0}));
    const std::vector<NodeId> leader = connected_components(net, sampled);

    RoundSpec<ComponentSummary, ops::Nothing> summary;
    summary.label = "esssp_components";
    summary.contract = [&](EdgeId e) { return sampled[e] != 0; };
    summary.input = [&](NodeId v) {
      ComponentSummary c;
      c.demand = d[v];
      if (on_cycle[v] && arcs[v].edge != kNoEdge) {
        c.cycle_weight = g.weight(arcs[v].edge);
        c.cut_edge = arcs[v].edge;
        c.cut_node = v;
      }
      return c;
    };
    summary.consensus = summary_op();
    summary.aggregate = ops::none();
    const std::vector<ComponentSummary> comp = net.run_round(summary).consensus;

    // Contracted graph: one node per component, cheapest reweighted edge per pair.
    std::vector<NodeId> index(n, kNoNode);
    std::size_t k = 0;
    for (NodeId v = 0; v < n; ++v)
      if (leader[v] == v) index[v] = static_cast<NodeId>(k++);
    std::vector<char> tree(m, 0);
    for (NodeId u = 0; u < n; ++u)
      if (arcs[u].edge != kNoEdge && comp[u].cut_node != u) tree[arcs[u].edge] = 1;
    if (k == 1) return tree;

    std::map<std::pair<NodeId, NodeId>, std::pair<double, EdgeId>> best;
    for (EdgeId e = 0; e < m; ++e) {
      const Edge &edge = g.edge(e);
      NodeId a = index[leader[edge.tail]], b = index[leader[edge.head]];
      if (a == b) continue;
      const double w = edge.weight + to_cycle.depth_dist[edge.tail] + to_cycle.depth_dist[edge.head] +
                       comp[edge.tail].cycle_weight + comp[edge.head].cycle_weight;
      if (a > b) std::swap(a, b);
      auto [it, fresh] = best.try_emplace({a, b}, w, e);
      if (!fresh && w < it->second.first) it->second = {w, e};
    }
    std::vector<Edge> edges;
    std::vector<EdgeId> origin;
    edges.reserve(best.size());
    for (const auto &[key, value] : best) {
      edges.push_back({key.first, key.second, value.first});
      origin.push_back(value.second);
    }
    const Graph minor = Graph::from_edges(k, std::move(edges), GraphOptions{0.0, true});
    Demand d_minor(k);
    for (NodeId v = 0; v < n; ++v)
      if (leader[v] == v) d_minor[index[v]] = comp[v].demand;

    MinorNetwork sub = net.derived(minor);
    const std::uint64_t level_seed = derive_seed(seed, {depth, 0x7e});
    const RoutingOperator R_minor =
        build_routing(sub, default_routing_params(minor, level_seed, opts.g_factor, opts.g_cap));
    const double alpha_minor = estimate_competitiveness(R_minor, level_seed, opts.alpha_pairs).alpha_hat;
    const std::vector<char> upper =
        solve(sub, &R_minor, alpha_minor, index[leader[s]], d_minor, eps_next, depth + 1);
    for (EdgeId e = 0; e < upper.size(); ++e)
      if (upper[e]) tree[origin[e]] = 1;
    return tree;
  }
};

std::vector<double> distances_from(const RootedForest &forest, const std::vector<NodeId> &leader, NodeId s) {
  std::vector<double> dist(forest.num_nodes(), kInf);
  for (NodeId v = 0; v < dist.size(); ++v)
    if (leader[v] == leader[s]) dist[v] = forest.depth_dist[v];
  return dist;
}

} // namespace

namespace {

void check_esssp_input(const Graph &g, NodeId s, const Demand &d, double eps) {
  const std::size_t n = g.num_nodes();
  if (s >= n) throw Error(ErrorCode::node_out_of_range, "esssp: source out of range");
  if (d.size() != n) throw Error(ErrorCode::dimension_mismatch, "esssp: demand length does not match the graph");
  if (!(eps > 0)) throw Error(ErrorCode::invalid_argument, "esssp: eps must be positive");
  if (!is_proper(d)) throw Error(ErrorCode::improper_demand, "esssp: demand does not sum to zero");
  for (NodeId v = 0; v < n; ++v) {
    if (v != s && d[v] < 0) {
      throw Error(ErrorCode::invalid_argument, "esssp: negative demand at node " + std::to_string(v + 1));
    }
  }
}

EssspTree run_esssp(MinorNetwork &net, const RoutingOperator *R, double alpha, NodeId s, const Demand &d,
                    double eps, std::uint64_t seed, const EssspOptions &options, const EdgeVector *flow) {
  const Graph &g = net.graph();
  EssspRun run{options, seed, options.depth_factor * ceil_log2(g.num_nodes()) + options.depth_offset};
  EssspTree out;
  out.in_tree = run.solve(net, R, alpha, s, d, eps, 0, flow);
  out.in_tree.resize(g.num_edges(), 0);
  out.depth = run.deepest + 1;
  out.mwu_iterations = run.mwu_iterations;
  return out;
}

} // namespace

EssspTree esssp(MinorNetwork &net, const RoutingOperator &R, NodeId s, const Demand &d, double eps,
                std::uint64_t seed, const EssspOptions &options) {
  const Graph &g = net.graph();
  check_esssp_input(g, s, d, eps);
  if (R.graph().num_nodes() != g.num_nodes() || R.graph().num_edges() != g.num_edges()) {
    throw Error(ErrorCode::dimension_mismatch, "esssp: routing built for another graph");
  }
  const double alpha = options.alpha_hat ? *options.alpha_hat
                                         : estimate_competitiveness(R, derive_seed(seed, {0xa1}), options.alpha_pairs).alpha_hat;
  return run_esssp(net, &R, alpha, s, d, eps, seed, options, nullptr);
}

EssspTree esssp_from_flow(MinorNetwork &net, NodeId s, const Demand &d, const EdgeVector &flow, double eps,
                          std::uint64_t seed, const EssspOptions &options) {
  const Graph &g = net.graph();
  check_esssp_input(g, s, d, eps);
  if (flow.size() != g.num_edges()) throw Error(ErrorCode::dimension_mismatch, "esssp: flow length does not match the graph");
  return run_esssp(net, nullptr, 0.0, s, d, eps, seed, options, &flow);
}

SsspResult sssp(MinorNetwork &net, const RoutingOperator &R, NodeId s, double eps, std::uint64_t seed,
                const SsspOptions &options) {
  const Graph &g = net.graph();
  const std::size_t n = g.num_nodes();
  if (s >= n) throw Error(ErrorCode::node_out_of_range, "sssp: source out of range");
  if (!(eps > 0 && eps < 1)) throw Error(ErrorCode::invalid_argument, "sssp: eps must lie in (0, 1)");
  const std::uint64_t start_rounds = net.rounds();

  const double alpha = options.alpha_hat ? *options.alpha_hat
                                         : estimate_competitiveness(R, derive_seed(seed, {0xa1})).alpha_hat;
  EssspOptions esssp_opts = options.esssp;
  esssp_opts.alpha_hat = alpha;
  // With reuse, the tree parameter is set so that the top ESSSP level asks
  // for exactly the accuracy of the potential solve.
  const double eps_tree = options.reuse_flow ? eps * options.phi_fraction * log2n(n) / esssp_opts.c
                                             : options.esssp_factor * eps / log2n(n);
  const auto cap = static_cast<unsigned>(std::ceil(options.c_loop * std::max(1U, ceil_log2(n))));

  SsspResult result;
  result.parent.resize(n);
  result.parent_edge.assign(n, kNoEdge);
  for (NodeId v = 0; v < n; ++v) result.parent[v] = v;
  std::vector<char> pending(n, 1);
  pending[s] = 0;
  std::size_t remaining = n - 1;
  NodeVector phi(n);

  auto current_tree = [&](std::uint64_t salt) {
    std::vector<char> mask(g.num_edges(), 0), roots(n, 0);
    for (NodeId v = 0; v < n; ++v) {
      if (result.parent[v] == v) roots[v] = 1;
      else mask[result.parent_edge[v]] = 1;
    }
    RootedForest forest = root_forest(net, mask, roots, salt);
    return distances_from(forest, connected_components(net, mask), s);
  };

  std::optional<std::pair<Demand, TransshipmentSolution>> previous;
  while (remaining > 0) {
    if (result.loop_iterations == cap) {
      throw Error(ErrorCode::iteration_cap, "sssp: " + std::to_string(remaining) + " nodes left after " +
                                                std::to_string(cap) + " iterations");
    }
    const unsigned it = result.loop_iterations++;
    Demand d(n);
    for (NodeId v = 0; v < n; ++v) {
      if (!pending[v]) continue;
      d[v] += 1;
      d[s] -= 1;
    }
    // The solver is deterministic, so an unchanged demand (always the case
    // right after the first iteration) reuses the previous pair.
    if (!previous || previous->first != d) {
      previous.emplace(d, solve_transshipment(net, R, d, eps * options.phi_fraction, alpha, options.transshipment));
      result.mwu_iterations += previous->second.iterations;
    }
    const TransshipmentSolution &pair = previous->second;
    const std::uint64_t tree_seed = derive_seed(seed, {it, 0xe5});
    const EssspTree star = options.reuse_flow ? esssp_from_flow(net, s, d, pair.flow, eps_tree, tree_seed, esssp_opts)
                                              : esssp(net, R, s, d, eps_tree, tree_seed, esssp_opts);
    result.mwu_iterations += star.mwu_iterations;

    std::vector<char> roots(n, 0);
    roots[s] = 1;
    const RootedForest rooted = root_forest(net, star.in_tree, roots, derive_seed(seed, {it, 0x51}));
    const std::vector<double> dist_tree = current_tree(derive_seed(seed, {it, 0x52}));

    for (NodeId v = 0; v < n; ++v) {
      if (rooted.depth_dist[v] <= dist_tree[v]) {
        result.parent[v] = rooted.parent[v];
        result.parent_edge[v] = rooted.parent_edge[v];
      }
      phi[v] = std::max(pair.potential[v] - pair.potential[s], phi[v]);
      if (pending[v] && dist_tree[v] <= (1 + eps) * phi[v]) {
        pending[v] = 0;
        --remaining;
      }
    }
  }

  result.dist = current_tree(derive_seed(seed, {0xd15}));
  result.potential.assign(phi.begin(), phi.end());
  result.rounds = net.rounds() - start_rounds;
  return result;
}

double max_stretch(const std::vector<double> &dist, const std::vector<double> &exact) {
  double worst = 1.0;
  for (std::size_t v = 0; v < dist.size(); ++v)
    if (exact[v] > 0) worst = std::max(worst, dist[v] / exact[v]);
  return worst;
}

nlohmann::json to_json(const SsspResult &r) {
  nlohmann::json j;
  j["parent"] = r.parent;
  j["dist"] = r.dist;
  j["rounds"] = r.rounds;
  j["loop_iterations"] = r.loop_iterations;
  j["mwu_iterations"] = r.mwu_iterations;
  if (r.stretch_max) j["stretch_max"] = *r.stretch_max;
  return j;
}

} // namespace lddflow
