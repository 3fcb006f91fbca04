#include <benchmark/benchmark.h>

#include <cmath>
#include <string>
#include <vector>

#include "lddflow/generators.hpp"
#include "lddflow/ldd.hpp"
#include "lddflow/oracles.hpp"
#include "lddflow/primitives.hpp"
#include "lddflow/sssp.hpp"

namespace lddflow {
namespace {

Graph er(std::int64_t n) {
  const double p = std::min(1.0, 2.0 * std::log(static_cast<double>(n)) / static_cast<double>(n));
  return generate("er:" + std::to_string(n) + ":" + std::to_string(p) + ":w1-100:seed3");
}

NetworkOptions fast() {
  NetworkOptions o;
  o.check_associativity = false;
  return o;
}

Demand spread_demand(std::size_t n) {
  Demand d(n);
  for (std::size_t v = 1; v < n; ++v) d[v] = 1, d[0] -= 1;
  return d;
}

void BM_MstBoruvka(benchmark::State &state) {
  const Graph g = er(state.range(0));
  for (auto _ : state) {
    MinorNetwork net(g, fast());
    benchmark::DoNotOptimize(mst_boruvka(net));
  }
}
BENCHMARK(BM_MstBoruvka)->RangeMultiplier(4)->Range(16, 1024);

void BM_SampleLdd(benchmark::State &state) {
  const Graph g = er(state.range(0));
  std::uint64_t seed = 0;
  for (auto _ : state) {
    MinorNetwork net(g, fast());
    benchmark::DoNotOptimize(sample_ldd(net, 200.0, ++seed));
  }
}
BENCHMARK(BM_SampleLdd)->RangeMultiplier(4)->Range(16, 1024);

void BM_SubtreeSums(benchmark::State &state) {
  const Graph g = generate("tree:" + std::to_string(state.range(0)) + ":w1-9:seed2");
  MinorNetwork setup(g);
  std::vector<char> roots(g.num_nodes(), 0);
  roots[0] = 1;
  const RootedForest f = root_forest(setup, std::vector<char>(g.num_edges(), 1), roots, 1);
  const NodeVector x(g.num_nodes(), 1.0);
  for (auto _ : state) {
    MinorNetwork net(g, fast());
    benchmark::DoNotOptimize(subtree_sums(net, f, x, 7));
  }
}
BENCHMARK(BM_SubtreeSums)->RangeMultiplier(4)->Range(16, 1024);

void BM_FindCycles(benchmark::State &state) {
  const Graph g = er(state.range(0));
  std::vector<Arc> arcs;
  for (NodeId v = 0; v < g.num_nodes(); ++v) arcs.push_back({v, g.neighbors(v)[0].edge});
  for (auto _ : state) {
    MinorNetwork net(g, fast());
    benchmark::DoNotOptimize(find_cycles(net, arcs, 5));
  }
}
BENCHMARK(BM_FindCycles)->RangeMultiplier(4)->Range(16, 1024);

void BM_BuildRouting(benchmark::State &state) {
  const Graph g = er(state.range(0));
  for (auto _ : state) {
    MinorNetwork net(g, fast());
    benchmark::DoNotOptimize(build_routing(net, default_routing_params(g, 1)));
  }
}
BENCHMARK(BM_BuildRouting)->RangeMultiplier(2)->Range(16, 256)->Unit(benchmark::kMillisecond);

void BM_Route(benchmark::State &state) {
  const Graph g = er(state.range(0));
  MinorNetwork net(g, fast());
  const RoutingOperator R = build_routing(net, default_routing_params(g, 1));
  const Demand d = spread_demand(g.num_nodes());
  for (auto _ : state) benchmark::DoNotOptimize(R.route(d));
  state.counters["rounds_per_call"] = static_cast<double>(R.rounds_per_application());
}
BENCHMARK(BM_Route)->RangeMultiplier(2)->Range(16, 256);

void BM_RouteTranspose(benchmark::State &state) {
  const Graph g = er(state.range(0));
  MinorNetwork net(g, fast());
  const RoutingOperator R = build_routing(net, default_routing_params(g, 1));
  const EdgeVector c(g.num_edges(), 1.0);
  for (auto _ : state) benchmark::DoNotOptimize(R.route_transpose(c));
}
BENCHMARK(BM_RouteTranspose)->RangeMultiplier(2)->Range(16, 256);

void BM_Transshipment(benchmark::State &state) {
  const Graph g = er(state.range(0));
  MinorNetwork setup(g, fast());
  const RoutingOperator R = build_routing(setup, default_routing_params(g, 1));
  const double alpha = estimate_competitiveness(R, 1).alpha_hat;
  const Demand d = spread_demand(g.num_nodes());
  const double opt = oracle::exact_transshipment(g, d).cost;
  for (auto _ : state) {
    MinorNetwork net(g, fast());
    const TransshipmentSolution s = solve_transshipment(net, R, d, 0.1, alpha);
    state.counters["mwu_iterations"] = static_cast<double>(s.iterations);
    state.counters["rounds"] = static_cast<double>(net.rounds());
    state.counters["cost_ratio"] = s.cost / opt;
  }
}
BENCHMARK(BM_Transshipment)->DenseRange(20, 60, 20)->Unit(benchmark::kMillisecond)->Iterations(1);

void BM_Sssp(benchmark::State &state) {
  const Graph g = er(state.range(0));
  MinorNetwork setup(g, fast());
  const RoutingOperator R = build_routing(setup, default_routing_params(g, 1));
  SsspOptions opts;
  opts.alpha_hat = estimate_competitiveness(R, 1).alpha_hat;
  const auto exact = oracle::dijkstra(g, 0).dist;
  for (auto _ : state) {
    MinorNetwork net(g, fast());
    const SsspResult r = sssp(net, R, 0, 0.2, 1, opts);
    state.counters["stretch_max"] = max_stretch(r.dist, exact);
    state.counters["rounds"] = static_cast<double>(r.rounds);
    state.counters["loop_iterations"] = r.loop_iterations;
  }
}
BENCHMARK(BM_Sssp)->DenseRange(20, 40, 20)->Unit(benchmark::kMillisecond)->Iterations(1);

} // namespace
} // namespace lddflow

BENCHMARK_MAIN();
