#include <gtest/gtest.h>

#include <cmath>

#include <nlohmann/json.hpp>

#include "lddflow/ldd.hpp"
#include "lddflow/oracles.hpp"
#include "test_graphs.hpp"

namespace lddflow {
namespace {

using testing::random_graph;

TEST(SampleLdd, HugeRadiusGivesOneComponent) {
  const Graph g = random_graph(30, 0.1, 1000, 4);
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    MinorNetwork net(g);
    const auto p = sample_ldd(net, 30 * 1000, seed);
    EXPECT_EQ(p.num_components(), 1u);
    EXPECT_TRUE(verify_ldd(g, p).empty());
    EXPECT_EQ(net.rounds(), ldd_round_charge(30));
  }
}

TEST(SampleLdd, SingleNode) {
  const Graph g = Graph::from_edges(1, {});
  MinorNetwork net(g);
  const auto p = sample_ldd(net, 5, 1);
  EXPECT_EQ(p.num_components(), 1u);
  EXPECT_EQ(p.center[0], 0u);
  EXPECT_EQ(p.root_dist(0), 0.0);
}

TEST(SampleLdd, RejectsSmallRadius) {
  MinorNetwork net(testing::path3());
  EXPECT_THROW(sample_ldd(net, 0.5, 1), Error);
}

TEST(SampleLdd, RandomGraphsHaveNoViolations) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const std::size_t n = 10 + 4 * seed;
    const Graph g = random_graph(n, 0.1, std::pow(n, 2), seed);
    for (double rho : {1.0, 10.0, 100.0, 1e4}) {
      MinorNetwork net(g);
      const auto p = sample_ldd(net, rho, seed * 31 + static_cast<std::uint64_t>(rho));
      const auto bad = verify_ldd(g, p);
      EXPECT_TRUE(bad.empty()) << "seed " << seed << " rho " << rho << ": " << bad.front();
      for (NodeId v = 0; v < n; ++v) EXPECT_LE(p.root_dist(v), rho);
    }
  }
}

TEST(SampleLdd, SeparationOnUnitPath) {
  // Adjacent nodes of P100 with rho = 10: separation frequency must stay
  // within c_q ln(n) / rho plus a 99% Monte Carlo margin.
  const Graph g = generate("path:100:unit");
  const int samples = 2000;
  std::vector<int> cut(g.num_edges(), 0);
  for (int s = 0; s < samples; ++s) {
    MinorNetwork net(g);
    const auto p = sample_ldd(net, 10, derive_seed(7, {static_cast<std::uint64_t>(s)}));
    for (EdgeId e = 0; e < g.num_edges(); ++e)
      cut[e] += p.component_of[g.edge(e).tail] != p.component_of[g.edge(e).head];
  }
  const double bound = 4.0 * std::log(100.0) / 10.0 + 3.0 * std::sqrt(std::log(100.0) / samples);
  for (EdgeId e = 0; e < g.num_edges(); ++e) EXPECT_LE(static_cast<double>(cut[e]) / samples, bound);
}

TEST(VerifyLdd, DetectsMovedNode) {
  const Graph g = generate("path:10:unit");
  LddPartition p;
  p.rho = 4;
  p.center = {0, 9};
  p.component_of = {0, 0, 0, 0, 0, 1, 1, 1, 1, 1};
  p.tree.in_forest.assign(9, 1);
  p.tree.in_forest[4] = 0;
  p.tree.parent = {0, 0, 1, 2, 3, 6, 7, 8, 9, 9};
  p.tree.parent_edge = {kNoEdge, 0, 1, 2, 3, 5, 6, 7, 8, kNoEdge};
  p.tree.depth_dist = {0, 1, 2, 3, 4, 4, 3, 2, 1, 0};
  EXPECT_TRUE(verify_ldd(g, p).empty());

  // Move node 5 (index 4) to the far component.
  p.component_of[4] = 1;
  p.tree.parent[4] = 5;
  p.tree.parent_edge[4] = 4;
  p.tree.in_forest[3] = 0;
  p.tree.in_forest[4] = 1;
  p.tree.depth_dist[4] = 5;
  const auto bad = verify_ldd(g, p);
  ASSERT_FALSE(bad.empty());
  bool radius = false;
  for (const auto &msg : bad) radius |= msg.find("radius") != std::string::npos;
  EXPECT_TRUE(radius);
}

TEST(LddJson, RoundTrip) {
  const Graph g = random_graph(25, 0.15, 50, 3);
  MinorNetwork net(g);
  const auto p = sample_ldd(net, 20, 9);
  const auto q = ldd_from_json(g, nlohmann::json::parse(to_json(p).dump()));
  EXPECT_EQ(q.component_of, p.component_of);
  EXPECT_EQ(q.center, p.center);
  EXPECT_EQ(q.tree.parent, p.tree.parent);
  EXPECT_EQ(q.tree.parent_edge, p.tree.parent_edge);
  EXPECT_EQ(q.tree.in_forest, p.tree.in_forest);
  EXPECT_EQ(q.tree.depth_dist, p.tree.depth_dist);
  EXPECT_THROW(ldd_from_json(g, nlohmann::json::parse("{}")), Error);
}

TEST(SampleLdd, Deterministic) {
  const Graph g = random_graph(40, 0.1, 100, 5);
  MinorNetwork a(g), b(g);
  EXPECT_EQ(to_json(sample_ldd(a, 30, 77)).dump(), to_json(sample_ldd(b, 30, 77)).dump());
}

} // namespace
} // namespace lddflow
