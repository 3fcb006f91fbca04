#include <gtest/gtest.h>

#include <cmath>

#include <nlohmann/json.hpp>

#include "lddflow/oracles.hpp"
#include "lddflow/primitives.hpp"
#include "lddflow/sssp.hpp"
#include "test_graphs.hpp"

namespace lddflow {
namespace {

using testing::make_graph;
using testing::random_graph;

struct Instance {
  Graph g;
  std::unique_ptr<MinorNetwork> net;
  RoutingOperator R;
  double alpha_hat;

  explicit Instance(Graph graph, std::uint64_t seed = 1) : g(std::move(graph)) {
    net = std::make_unique<MinorNetwork>(g);
    R = build_routing(*net, default_routing_params(g, seed));
    alpha_hat = estimate_competitiveness(R, seed).alpha_hat;
  }
};

Demand uniform_demand(std::size_t n, NodeId s) {
  Demand d(n);
  for (NodeId v = 0; v < n; ++v) {
    if (v == s) continue;
    d[v] = 1;
    d[s] -= 1;
  }
  return d;
}

std::size_t count(const std::vector<char> &mask) { return std::count(mask.begin(), mask.end(), 1); }

bool spanning_tree(const Graph &g, const std::vector<char> &mask) {
  if (count(mask) + 1 != g.num_nodes()) return false;
  const auto leader = oracle::union_find_components(g, mask);
  return std::all_of(leader.begin(), leader.end(), [](NodeId l) { return l == 0; });
}

/// Root distances of the tree given by the mask, by the oracle.
std::vector<double> tree_distances(const Graph &g, const std::vector<char> &mask, NodeId s) {
  MinorNetwork scratch(g);
  std::vector<char> roots(g.num_nodes(), 0);
  roots[s] = 1;
  const RootedForest f = root_forest(scratch, mask, roots, 1);
  return oracle::tree_depths(g, f.parent, f.parent_edge);
}

TEST(Esssp, TreeInputReturnsTheTree) {
  const Graph g = generate("tree:15:w1-9:seed4");
  Instance in(g);
  const auto t = esssp(*in.net, in.R, 0, uniform_demand(15, 0), 0.5, 3);
  EXPECT_EQ(count(t.in_tree), 14u);
  EXPECT_TRUE(spanning_tree(g, t.in_tree));
}

TEST(Esssp, SingleEdge) {
  Instance in(testing::k2(5));
  const auto t = esssp(*in.net, in.R, 1, Demand({1, -1}), 0.5, 1);
  EXPECT_EQ(t.in_tree, std::vector<char>{1});
}

TEST(Esssp, RejectsBadDemands) {
  Instance in(testing::path3());
  EXPECT_THROW(
      {
        try {
          esssp(*in.net, in.R, 0, Demand({1, -2, 1}), 0.5, 1);
        } catch (const Error &e) {
          EXPECT_EQ(e.code(), ErrorCode::invalid_argument);
          throw;
        }
      },
      Error);
  EXPECT_THROW(esssp(*in.net, in.R, 0, Demand({-1, 2, 0}), 0.5, 1), Error);
  EXPECT_THROW(esssp(*in.net, in.R, 5, Demand({-1, 1, 0}), 0.5, 1), Error);
  EXPECT_THROW(esssp(*in.net, in.R, 0, Demand({-1, 1, 0}), 0.0, 1), Error);
}

TEST(Esssp, ZeroDemandGivesMinimumSpanningTree) {
  const Graph g = random_graph(12, 0.3, 20, 5);
  Instance in(g);
  const auto t = esssp(*in.net, in.R, 0, Demand(12), 0.5, 1);
  EXPECT_EQ(t.in_tree, oracle::kruskal(g).in_tree);
}

TEST(Esssp, SpanningTreeOnRandomGraphs) {
  for (std::uint64_t seed = 1; seed <= 6; ++seed) {
    const Graph g = random_graph(10 + 3 * seed, 0.25, 50, seed);
    Instance in(g, seed);
    const NodeId s = static_cast<NodeId>(seed % g.num_nodes());
    const auto t = esssp(*in.net, in.R, s, uniform_demand(g.num_nodes(), s), 0.5, seed);
    EXPECT_TRUE(spanning_tree(g, t.in_tree)) << "seed " << seed;
    EXPECT_GE(t.depth, 1u);
  }
}

TEST(Esssp, SuppliedFlowMatchesInternalSolve) {
  const Graph g = random_graph(14, 0.3, 30, 2);
  Instance in(g);
  const Demand d = uniform_demand(14, 3);
  EssspOptions opts;
  opts.alpha_hat = in.alpha_hat;
  const double eps = 0.5;
  const double eps_level = opts.c * eps / std::log2(14.0);
  MinorNetwork scratch(g);
  const auto sol = solve_transshipment(scratch, in.R, d, eps_level, in.alpha_hat);
  for (std::uint64_t seed : {1, 2, 3}) {
    const auto a = esssp(*in.net, in.R, 3, d, eps, seed, opts);
    const auto b = esssp_from_flow(*in.net, 3, d, sol.flow, eps, seed, opts);
    EXPECT_EQ(a.in_tree, b.in_tree);
  }
}

// Pendant source 0 and a triangle 1-2-3 carrying a strong circulation: the
// sampled graph usually closes the triangle, forcing a contraction level.
struct CirculationCase {
  Graph g = make_graph(4, {{0, 1, 1}, {1, 2, 1}, {2, 3, 1}, {1, 3, 1}});
  Demand d{-1, 1, 0, 0};
  EdgeVector flow{-1, 1000, 1000, -1000};
};

TEST(Esssp, RecursesThroughContractedCycles) {
  CirculationCase c;
  ASSERT_EQ((apply_B(c.g, c.flow) - c.d).norm1(), 0.0);
  unsigned deepest = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    MinorNetwork net(c.g);
    const auto t = esssp_from_flow(net, 0, c.d, c.flow, 0.5, seed);
    EXPECT_TRUE(spanning_tree(c.g, t.in_tree));
    EXPECT_TRUE(t.in_tree[0]) << "the pendant edge is a bridge";
    deepest = std::max(deepest, t.depth);
  }
  EXPECT_GE(deepest, 2u);
}

TEST(Esssp, DepthCapIsEnforced) {
  CirculationCase c;
  EssspOptions opts;
  opts.depth_factor = 0;
  opts.depth_offset = 0;
  bool capped = false;
  for (std::uint64_t seed = 1; seed <= 20 && !capped; ++seed) {
    MinorNetwork net(c.g);
    try {
      esssp_from_flow(net, 0, c.d, c.flow, 0.5, seed, opts);
    } catch (const Error &e) {
      EXPECT_EQ(e.code(), ErrorCode::depth_cap);
      capped = true;
    }
  }
  EXPECT_TRUE(capped);
}

TEST(Esssp, MeanWeightedStretchIsSmall) {
  const Graph g = random_graph(20, 0.2, 30, 11);
  Instance in(g, 11);
  const NodeId s = 0;
  const Demand d = uniform_demand(20, s);
  const auto exact = oracle::dijkstra(g, s).dist;
  double opt = 0;
  for (NodeId v = 1; v < 20; ++v) opt += exact[v];

  const double eps = 0.5;
  EssspOptions opts;
  opts.alpha_hat = in.alpha_hat;
  MinorNetwork scratch(g);
  const auto flow = solve_transshipment(scratch, in.R, d, opts.c * eps / std::log2(20.0), in.alpha_hat).flow;
  const int samples = 40;
  double sum = 0, sum_sq = 0;
  for (int seed = 0; seed < samples; ++seed) {
    MinorNetwork net(g);
    const auto t = esssp_from_flow(net, s, d, flow, eps, seed, opts);
    const auto dist = tree_distances(g, t.in_tree, s);
    double cost = 0;
    for (NodeId v = 1; v < 20; ++v) cost += dist[v];
    sum += cost / opt;
    sum_sq += (cost / opt) * (cost / opt);
  }
  const double mean = sum / samples;
  const double sd = std::sqrt(std::max(0.0, sum_sq / samples - mean * mean));
  EXPECT_LE(mean, (1 + eps) + 3 * sd / std::sqrt(samples));
}

void expect_valid_result(const Graph &g, NodeId s, const SsspResult &r) {
  const std::size_t n = g.num_nodes();
  ASSERT_EQ(r.parent.size(), n);
  EXPECT_EQ(r.parent[s], s);
  EXPECT_EQ(r.dist[s], 0.0);
  for (NodeId v = 0; v < n; ++v) {
    if (v == s) continue;
    const EdgeId e = r.parent_edge[v];
    ASSERT_NE(e, kNoEdge);
    EXPECT_EQ(g.edge(e).other(v), r.parent[v]);
    EXPECT_NEAR(r.dist[v], r.dist[r.parent[v]] + g.weight(e), 1e-9 * (1 + r.dist[v]));
  }
  const auto depth = oracle::tree_depths(g, r.parent, r.parent_edge);
  for (NodeId v = 0; v < n; ++v) EXPECT_TRUE(std::isfinite(depth[v])) << "node " << v << " does not reach s";
}

TEST(Sssp, StarFromCenter) {
  const Graph g = make_graph(5, {{0, 1, 3}, {0, 2, 1}, {0, 3, 7}, {0, 4, 2}});
  Instance in(g);
  const auto r = sssp(*in.net, in.R, 0, 0.2, 1);
  expect_valid_result(g, 0, r);
  EXPECT_EQ(r.parent, (std::vector<NodeId>{0, 0, 0, 0, 0}));
  EXPECT_EQ(r.dist, (std::vector<double>{0, 3, 1, 7, 2}));
}

TEST(Sssp, UnitPathIsExact) {
  const Graph g = generate("path:5:unit");
  Instance in(g);
  const auto r = sssp(*in.net, in.R, 0, 0.1, 1);
  expect_valid_result(g, 0, r);
  EXPECT_EQ(r.dist, (std::vector<double>{0, 1, 2, 3, 4}));
  EXPECT_EQ(max_stretch(r.dist, oracle::dijkstra(g, 0).dist), 1.0);
}

TEST(Sssp, RandomGraphStretch) {
  for (std::uint64_t seed : {1, 2}) {
    const Graph g = random_graph(40, 0.1, 40, seed);
    Instance in(g, seed);
    const NodeId s = static_cast<NodeId>(seed * 7 % 40);
    const double eps = 0.2;
    const auto r = sssp(*in.net, in.R, s, eps, seed);
    expect_valid_result(g, s, r);
    const auto exact = oracle::dijkstra(g, s).dist;
    for (NodeId v = 0; v < 40; ++v) {
      EXPECT_LE(r.dist[v], (1 + eps) * exact[v] * (1 + 1e-12)) << "node " << v;
      EXPECT_LE(r.potential[v], exact[v] * (1 + 1e-9) + 1e-9) << "removal soundness at node " << v;
    }
    EXPECT_LE(r.loop_iterations, static_cast<unsigned>(std::ceil(8.0 * ceil_log2(40))));
    EXPECT_GT(r.rounds, 0u);
  }
}

TEST(Sssp, WithoutFlowReuse) {
  const Graph g = random_graph(12, 0.3, 10, 3);
  Instance in(g, 3);
  SsspOptions opts;
  opts.reuse_flow = false;
  opts.esssp_factor = 4.0;
  const auto r = sssp(*in.net, in.R, 2, 0.3, 3, opts);
  expect_valid_result(g, 2, r);
  EXPECT_LE(max_stretch(r.dist, oracle::dijkstra(g, 2).dist), 1.3 + 1e-12);
}

TEST(Sssp, SingleNode) {
  const Graph g = make_graph(1, {});
  Instance in(g);
  const auto r = sssp(*in.net, in.R, 0, 0.2, 1);
  EXPECT_EQ(r.parent, std::vector<NodeId>{0});
  EXPECT_EQ(r.loop_iterations, 0u);
}

TEST(Sssp, RejectsBadArguments) {
  Instance in(testing::path3());
  EXPECT_THROW(sssp(*in.net, in.R, 0, 0.0, 1), Error);
  EXPECT_THROW(sssp(*in.net, in.R, 0, 1.0, 1), Error);
  EXPECT_THROW(sssp(*in.net, in.R, 3, 0.2, 1), Error);
}

TEST(Sssp, LoopCapIsEnforced) {
  const Graph g = random_graph(10, 0.3, 10, 9);
  Instance in(g);
  SsspOptions opts;
  opts.c_loop = 0.25; // a single iteration can never finish
  try {
    sssp(*in.net, in.R, 0, 0.2, 1, opts);
    FAIL() << "expected the loop cap to trigger";
  } catch (const Error &e) {
    EXPECT_EQ(e.code(), ErrorCode::iteration_cap);
  }
}

TEST(Sssp, JsonIsDeterministic) {
  const Graph g = random_graph(15, 0.3, 20, 4);
  auto run = [&] {
    Instance in(g, 4);
    SsspResult r = sssp(*in.net, in.R, 0, 0.2, 7);
    r.stretch_max = max_stretch(r.dist, oracle::dijkstra(g, 0).dist);
    return to_json(r).dump();
  };
  const std::string a = run();
  EXPECT_EQ(a, run());
  const auto j = nlohmann::json::parse(a);
  for (const char *key : {"parent", "dist", "rounds", "loop_iterations", "stretch_max"}) EXPECT_TRUE(j.contains(key));
}

} // namespace
} // namespace lddflow
