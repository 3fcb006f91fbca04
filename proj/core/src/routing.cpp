#include "lddflow/routing.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>

#include <nlohmann/json.hpp>

namespace lddflow {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

NetworkOptions scratch_options() {
  NetworkOptions o;
  o.check_associativity = false;
  return o;
}

/// Rounds of one distributed subtree-sum run on the forest.
std::uint64_t measure_eval_rounds(const Graph &g, const RootedForest &forest, std::uint64_t seed) {
  MinorNetwork scratch(g, scratch_options());
  subtree_sums(scratch, forest, NodeVector(g.num_nodes(), 1.0), seed);
  return scratch.rounds();
}

std::vector<double> distances_from(const Graph &g, NodeId s) {
  std::vector<double> dist(g.num_nodes(), kInf);
  using Item = std::pair<double, NodeId>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
  dist[s] = 0.0;
  heap.push({0.0, s});
  while (!heap.empty()) {
    const auto [dv, v] = heap.top();
    heap.pop();
    if (dv > dist[v]) continue;
    for (const Incidence &inc : g.neighbors(v)) {
      const double nd = dv + g.weight(inc.edge);
      if (nd < dist[inc.neighbor]) {
        dist[inc.neighbor] = nd;
        heap.push({nd, inc.neighbor});
      }
    }
  }
  return dist;
}

double power(double base, unsigned exp) {
  double r = 1.0;
  for (unsigned i = 0; i < exp; ++i) r *= base;
  return r;
}

} // namespace

TreePlan::TreePlan(const Graph &g, const RootedForest &forest) {
  const TreeSweep sweep(forest);
  for (const NodeId v : sweep.order()) {
    if (forest.is_root(v)) continue;
    const EdgeId e = forest.parent_edge[v];
    node.push_back(v);
    parent.push_back(forest.parent[v]);
    edge.push_back(e);
    sign.push_back(g.edge(e).tail == v ? 1.0 : -1.0);
  }
}

void TreePlan::route_into(const NodeVector &d, double scale, EdgeVector &f, std::vector<double> &work) const {
  work.assign(d.begin(), d.end());
  for (std::size_t i = node.size(); i-- > 0;) {
    const double below = work[node[i]];
    f[edge[i]] += scale * sign[i] * below;
    work[parent[i]] += below;
  }
}

void TreePlan::transpose_into(const EdgeVector &c, double scale, NodeVector &y, std::vector<double> &work) const {
  // work[v] accumulates the signed costs on the path from v to its root.
  work.assign(y.size(), 0.0);
  for (std::size_t i = 0; i < node.size(); ++i) {
    const double acc = work[parent[i]] + sign[i] * c[edge[i]];
    work[node[i]] = acc;
    y[node[i]] += scale * acc;
  }
}

RoutingParams default_routing_params(const Graph &g, std::uint64_t seed, double g_factor, unsigned g_cap) {
  const auto n = static_cast<double>(std::max<std::size_t>(g.num_nodes(), 2));
  const double lg = std::log2(n);
  RoutingParams p;
  p.seed = seed;
  p.i_max = std::max(1u, static_cast<unsigned>(std::lround(std::pow(lg, 0.25))));
  const double target = std::max(std::pow(n, kRoutingExponent + 1.0), n * std::max(1.0, g.max_weight()));
  double rho = std::max(2.0, std::floor(std::pow(target, 1.0 / p.i_max)) - 1.0);
  while (power(rho, p.i_max) < target) rho += 1.0;
  p.rho = rho;
  p.g = std::clamp(static_cast<unsigned>(std::ceil(g_factor * lg)), 1u, std::max(1u, g_cap));
  return p;
}

void validate_routing_params(const RoutingParams &p, std::size_t n) {
  if (!(p.rho >= 2.0)) throw Error(ErrorCode::invalid_argument, "routing radius rho must be at least 2");
  if (p.i_max < 1) throw Error(ErrorCode::invalid_argument, "routing needs at least one level");
  if (p.g < 1) throw Error(ErrorCode::invalid_argument, "routing needs at least one decomposition per level");
  const double nn = static_cast<double>(std::max<std::size_t>(n, 1));
  if (power(p.rho, p.i_max) < std::pow(nn, kRoutingExponent + 1.0) * (1.0 - 1e-12))
    throw Error(ErrorCode::invalid_argument, "routing parameters violate rho^i_max >= n^(C+1)");
}

RoutingOperator::RoutingOperator(std::shared_ptr<const Graph> graph, RoutingParams params,
                                 std::vector<RoutingLevel> levels, RootedForest final_tree)
    : graph_(std::move(graph)), params_(params), levels_(std::move(levels)) {
  final_tree_.partition.tree = std::move(final_tree);
  final_tree_.eval_rounds = measure_eval_rounds(*graph_, final_tree_.partition.tree,
                                                derive_seed(params_.seed, {0xf1, 0}));
  final_plan_ = TreePlan(*graph_, final_tree_.partition.tree);
  for (const RoutingLevel &level : levels_) {
    auto &row = plans_.emplace_back();
    for (const RoutedPartition &rp : level.partitions) row.emplace_back(*graph_, rp.partition.tree);
  }
}

EdgeVector RoutingOperator::route(const Demand &d, MinorNetwork *net) const {
  const Graph &g = *graph_;
  if (d.size() != g.num_nodes()) throw Error(ErrorCode::dimension_mismatch, "route: demand length mismatch");
  if (!is_proper(d)) throw Error(ErrorCode::improper_demand, "route: demand does not sum to zero");
  EdgeVector total(g.num_edges());
  NodeVector residual = d;
  std::vector<double> work;
  for (std::size_t i = 0; i < levels_.size(); ++i) {
    const auto &parts = levels_[i].partitions;
    EdgeVector fi(g.num_edges());
    const double scale = 1.0 / static_cast<double>(parts.size());
    for (std::size_t j = 0; j < parts.size(); ++j) {
      plans_[i][j].route_into(residual, scale, fi, work);
      if (net) net->charge_rounds(parts[j].eval_rounds, "ldd_route");
    }
    residual -= net ? apply_B(*net, fi) : apply_B(g, fi);
    total += fi;
  }
  final_plan_.route_into(residual, 1.0, total, work);
  if (net) net->charge_rounds(final_tree_.eval_rounds, "tree_route");
  return total;
}

NodeVector RoutingOperator::route_transpose(const EdgeVector &c, MinorNetwork *net) const {
  const Graph &g = *graph_;
  if (c.size() != g.num_edges()) throw Error(ErrorCode::dimension_mismatch, "route_transpose: length mismatch");
  // R = R_T M_k ... M_1 + sum_i R_i M_{i-1} ... M_1 with M_i = I - B R_i, so
  // R^T c = y_1 where y_{k+1} = R_T^T c and y_i = y_{i+1} + R_i^T (c - B^T y_{i+1}).
  NodeVector y(g.num_nodes());
  std::vector<double> work;
  final_plan_.transpose_into(c, 1.0, y, work);
  if (net) net->charge_rounds(final_tree_.eval_rounds, "tree_route_transpose");
  for (std::size_t i = levels_.size(); i-- > 0;) {
    const auto &parts = levels_[i].partitions;
    const EdgeVector gap = c - (net ? apply_Bt(*net, y) : apply_Bt(g, y));
    const double scale = 1.0 / static_cast<double>(parts.size());
    for (std::size_t j = 0; j < parts.size(); ++j) {
      plans_[i][j].transpose_into(gap, scale, y, work);
      if (net) net->charge_rounds(parts[j].eval_rounds, "ldd_route_transpose");
    }
  }
  return y;
}

std::vector<LevelTrace> RoutingOperator::trace_route(const Demand &d) const {
  const Graph &g = *graph_;
  if (!is_proper(d)) throw Error(ErrorCode::improper_demand, "route: demand does not sum to zero");
  std::vector<LevelTrace> out;
  NodeVector residual = d;
  std::vector<double> work;
  for (std::size_t i = 0; i < levels_.size(); ++i) {
    const auto &parts = levels_[i].partitions;
    LevelTrace t{levels_[i].radius, residual, EdgeVector(g.num_edges())};
    for (std::size_t j = 0; j < parts.size(); ++j)
      plans_[i][j].route_into(residual, 1.0 / parts.size(), t.flow, work);
    residual -= apply_B(g, t.flow);
    out.push_back(std::move(t));
  }
  LevelTrace last{kInf, residual, EdgeVector(g.num_edges())};
  final_plan_.route_into(residual, 1.0, last.flow, work);
  out.push_back(std::move(last));
  return out;
}

std::uint64_t RoutingOperator::rounds_per_application() const {
  std::uint64_t total = final_tree_.eval_rounds;
  for (const RoutingLevel &level : levels_) {
    total += 1;
    for (const RoutedPartition &rp : level.partitions) total += rp.eval_rounds;
  }
  return total;
}

RoutingOperator build_routing(MinorNetwork &net, const RoutingParams &params) {
  const Graph &g = net.graph();
  const std::size_t n = g.num_nodes();
  validate_routing_params(params, n);
  if (net.has_frozen_edges())
    throw Error(ErrorCode::invalid_argument, "build_routing needs an explicit graph, not a frozen-edge view");

  std::vector<RoutingLevel> levels;
  if (n > 1) {
    double radius = 1.0;
    for (unsigned i = 1; i <= params.i_max; ++i) {
      radius *= params.rho;
      RoutingLevel level;
      level.radius = radius;
      for (unsigned j = 0; j < params.g; ++j) {
        RoutedPartition rp;
        rp.partition = sample_ldd(net, radius, derive_seed(params.seed, {i, j}), params.ldd);
        rp.eval_rounds = measure_eval_rounds(g, rp.partition.tree, derive_seed(params.seed, {i, j, 1}));
        level.partitions.push_back(std::move(rp));
      }
      levels.push_back(std::move(level));
    }
  }
  const std::vector<char> mst = mst_boruvka(net);
  std::vector<char> is_root(n, 0);
  if (n > 0) is_root[0] = 1;
  RootedForest tree = root_forest(net, mst, is_root, derive_seed(params.seed, {0xf0}));
  return RoutingOperator(std::make_shared<const Graph>(g), params, std::move(levels), std::move(tree));
}

std::uint64_t build_round_bound(const RoutingParams &params, std::size_t n) {
  std::uint64_t poly = 1;
  for (unsigned i = 0; i < kBuildRoundExponent; ++i) poly *= ceil_log2(n) + 1;
  return std::uint64_t{kBuildRoundConstant} * params.g * params.i_max * poly;
}

EdgeVector ldd_route(const Graph &g, const LddPartition &p, const NodeVector &d) {
  if (d.size() != g.num_nodes()) throw Error(ErrorCode::dimension_mismatch, "ldd_route: demand length mismatch");
  EdgeVector f(g.num_edges());
  std::vector<double> work;
  TreePlan(g, p.tree).route_into(d, 1.0, f, work);
  return f;
}

NodeVector ldd_route_transpose(const Graph &g, const LddPartition &p, const EdgeVector &c) {
  if (c.size() != g.num_edges()) throw Error(ErrorCode::dimension_mismatch, "ldd_route_transpose: length mismatch");
  NodeVector y(g.num_nodes());
  std::vector<double> work;
  TreePlan(g, p.tree).transpose_into(c, 1.0, y, work);
  return y;
}

std::vector<LevelDiagnostics> routing_diagnostics(const RoutingOperator &r, const Demand &d,
                                                  const std::function<double(const Demand &)> &opt_norm) {
  const std::vector<LevelTrace> trace = r.trace_route(d);
  std::vector<LevelDiagnostics> out;
  double scale = 1.0;
  for (const LevelTrace &t : trace) {
    LevelDiagnostics level;
    level.scale = scale;
    level.demand_l1 = t.demand.norm1();
    if (opt_norm) {
      level.demand_opt = opt_norm(t.demand);
      level.potential = *level.demand_opt + level.demand_l1 * scale;
    }
    out.push_back(level);
    scale *= r.params().rho;
  }
  return out;
}

nlohmann::json to_json(const std::vector<LevelDiagnostics> &levels) {
  nlohmann::json j = nlohmann::json::array();
  for (const LevelDiagnostics &l : levels) {
    nlohmann::json e = {{"scale", l.scale}, {"demand_l1", l.demand_l1}};
    if (l.demand_opt) e["demand_opt"] = *l.demand_opt;
    if (l.potential) e["potential"] = *l.potential;
    j.push_back(std::move(e));
  }
  return j;
}

CompetitivenessEstimate estimate_competitiveness(const RoutingOperator &r, std::uint64_t seed, std::size_t pairs,
                                                 double safety) {
  const Graph &g = r.graph();
  const std::size_t n = g.num_nodes();
  CompetitivenessEstimate est;
  if (n < 2) return est;
  Rng rng(seed);
  for (std::size_t k = 0; k < pairs; ++k) {
    const auto s = static_cast<NodeId>(rng.below(n));
    auto t = static_cast<NodeId>(rng.below(n - 1));
    if (t >= s) ++t;
    const double cost = flow_cost(g, r.route(pair_demand(n, s, t)));
    est.max_ratio = std::max(est.max_ratio, cost / distances_from(g, s)[t]);
    ++est.pairs;
  }
  est.alpha_hat = std::max(2.0, safety * est.max_ratio);
  return est;
}

nlohmann::json to_json(const RoutingOperator &r) {
  nlohmann::json levels = nlohmann::json::array();
  for (const RoutingLevel &level : r.levels()) {
    nlohmann::json parts = nlohmann::json::array();
    for (const RoutedPartition &rp : level.partitions) parts.push_back(to_json(rp.partition));
    levels.push_back({{"radius", level.radius}, {"partitions", std::move(parts)}});
  }
  const RootedForest &t = r.final_tree();
  nlohmann::json parent_edge = nlohmann::json::array();
  for (EdgeId e : t.parent_edge) parent_edge.push_back(e == kNoEdge ? -1 : static_cast<long long>(e));
  const RoutingParams &p = r.params();
  return {{"params", {{"rho", p.rho}, {"i_max", p.i_max}, {"g", p.g}, {"seed", p.seed}}},
          {"levels", std::move(levels)},
          {"final_tree", {{"parent", t.parent}, {"parent_edge", parent_edge}, {"depth_dist", t.depth_dist}}}};
}

RoutingOperator routing_from_json(const Graph &g, const nlohmann::json &j) {
  try {
    RoutingParams p;
    const auto &jp = j.at("params");
    p.rho = jp.at("rho").get<double>();
    p.i_max = jp.at("i_max").get<unsigned>();
    p.g = jp.at("g").get<unsigned>();
    p.seed = jp.at("seed").get<std::uint64_t>();
    std::vector<RoutingLevel> levels;
    std::uint64_t index = 0;
    for (const auto &jl : j.at("levels")) {
      RoutingLevel level;
      level.radius = jl.at("radius").get<double>();
      for (const auto &jpart : jl.at("partitions")) {
        RoutedPartition rp;
        rp.partition = ldd_from_json(g, jpart);
        rp.eval_rounds = measure_eval_rounds(g, rp.partition.tree, derive_seed(p.seed, {0xa, index++}));
        level.partitions.push_back(std::move(rp));
      }
      levels.push_back(std::move(level));
    }
    const auto &jt = j.at("final_tree");
    RootedForest t;
    t.parent = jt.at("parent").get<std::vector<NodeId>>();
    t.depth_dist = jt.at("depth_dist").get<std::vector<double>>();
    t.in_forest.assign(g.num_edges(), 0);
    for (long long e : jt.at("parent_edge").get<std::vector<long long>>()) {
      t.parent_edge.push_back(e < 0 ? kNoEdge : static_cast<EdgeId>(e));
      if (e >= 0) t.in_forest.at(static_cast<std::size_t>(e)) = 1;
    }
    const std::string problem = validate_forest(g, t);
    if (!problem.empty()) throw Error(ErrorCode::parse, "routing JSON final tree: " + problem);
    return RoutingOperator(std::make_shared<const Graph>(g), p, std::move(levels), std::move(t));
  } catch (const nlohmann::json::exception &ex) {
    throw Error(ErrorCode::parse, std::string("malformed routing JSON: ") + ex.what());
  } catch (const std::out_of_range &) {
    throw Error(ErrorCode::parse, "routing JSON edge id out of range");
  }
}

} // namespace lddflow
