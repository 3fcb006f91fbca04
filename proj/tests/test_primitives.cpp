#include <gtest/gtest.h>

#include <cmath>

#include "lddflow/oracles.hpp"
#include "lddflow/primitives.hpp"
#include "test_graphs.hpp"

namespace lddflow {
namespace {

using testing::make_graph;
using testing::random_graph;

std::vector<char> all_edges(const Graph &g) { return std::vector<char>(g.num_edges(), 1); }

std::vector<char> root_mask(std::size_t n, std::initializer_list<NodeId> roots) {
  std::vector<char> mask(n, 0);
  for (NodeId r : roots) mask[r] = 1;
  return mask;
}

/// A random spanning tree of g (Kruskal under random keys).
std::vector<char> random_spanning_tree(const Graph &g, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Edge> shuffled;
  for (const Edge &e : g.edges()) shuffled.push_back({e.tail, e.head, 1.0 + rng.below(1000)});
  return oracle::kruskal(Graph::from_edges(g.num_nodes(), shuffled, {1e9, true})).in_tree;
}

ErrorCode code_of(auto &&fn) {
  try {
    fn();
  } catch (const Error &e) {
    return e.code();
  }
  return ErrorCode::io;
}

TEST(Boruvka, Triangle) {
  const Graph g = testing::triangle(1, 2, 3);
  MinorNetwork net(g);
  EXPECT_EQ(mst_boruvka(net), (std::vector<char>{1, 1, 0}));
}

TEST(Boruvka, TreeInputKeepsAllEdges) {
  const Graph g = generate("tree:40:w1-100:seed3");
  MinorNetwork net(g);
  EXPECT_EQ(mst_boruvka(net), all_edges(g));
}

TEST(Boruvka, MatchesKruskalWithinLogRounds) {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const std::size_t n = 5 + seed * 3;
    const Graph g = random_graph(n, 0.15, seed % 3 == 0 ? 1 : 1000, seed);
    MinorNetwork net(g);
    const auto tree = mst_boruvka(net);
    EXPECT_EQ(tree, oracle::kruskal(g).in_tree) << "seed " << seed;
    EXPECT_LE(net.rounds(), 2u * ceil_log2(n)) << "seed " << seed;
  }
}

TEST(Boruvka, RunsOnMinors) {
  const Graph g = random_graph(30, 0.2, 100, 77);
  MinorNetwork net(g);
  const auto kr = oracle::kruskal(g);
  std::vector<EdgeId> frozen;
  for (EdgeId e = 0; e < g.num_edges() && frozen.size() < 10; ++e)
    if (kr.in_tree[e]) frozen.push_back(e);
  MinorNetwork view = net.as_minor(frozen);
  auto tree = mst_boruvka(view);
  for (EdgeId e : frozen) tree[e] = 1;
  EXPECT_EQ(tree, kr.in_tree);
}

TEST(Components, Examples) {
  const Graph g = random_graph(12, 0.3, 5, 1);
  MinorNetwork net(g);
  std::vector<NodeId> ids(12);
  std::iota(ids.begin(), ids.end(), NodeId{0});
  EXPECT_EQ(connected_components(net, std::vector<char>(g.num_edges(), 0)), ids);
  EXPECT_EQ(connected_components(net, all_edges(g)), std::vector<NodeId>(12, 0));
  EXPECT_EQ(net.rounds(), 2u);
}

TEST(Components, MatchUnionFind) {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const Graph g = random_graph(40, 0.1, 5, seed);
    Rng rng(seed);
    auto mask = random_spanning_tree(g, seed);
    for (char &c : mask) c = c && rng.bernoulli(0.6);
    MinorNetwork net(g);
    EXPECT_EQ(connected_components(net, mask), oracle::union_find_components(g, mask));
  }
}

TEST(RootForest, SingleEdge) {
  const Graph g = testing::k2(7);
  MinorNetwork net(g);
  const auto rf = root_forest(net, {1}, root_mask(2, {0}), 1);
  EXPECT_EQ(rf.parent, (std::vector<NodeId>{0, 0}));
  EXPECT_EQ(rf.parent_edge, (std::vector<EdgeId>{kNoEdge, 0}));
  EXPECT_EQ(rf.depth_dist, (std::vector<double>{0, 7}));
}

TEST(RootForest, PathRootedInMiddle) {
  const Graph g = testing::path3();
  MinorNetwork net(g);
  const auto rf = root_forest(net, {1, 1}, root_mask(3, {1}), 2);
  EXPECT_EQ(rf.parent, (std::vector<NodeId>{1, 1, 1}));
  EXPECT_EQ(rf.depth_dist, (std::vector<double>{1, 0, 2}));
  EXPECT_EQ(validate_forest(g, rf), "");
}

TEST(RootForest, MatchesTreeDfs) {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const std::size_t n = seed < 20 ? 8 : 60;
    const Graph g = seed < 20 ? generate("er:8:1:w1-50:seed" + std::to_string(seed))
                              : random_graph(n, 0.1, 1000, seed);
    auto forest = random_spanning_tree(g, seed);
    if (seed % 2) {
      // Cut a few edges and root each resulting tree at its max-id node.
      Rng rng(seed);
      for (char &c : forest) c = c && !rng.bernoulli(0.2);
    }
    const auto leader = oracle::union_find_components(g, forest);
    std::vector<NodeId> root_of(n, 0);
    for (NodeId v = 0; v < n; ++v) root_of[leader[v]] = v;
    std::vector<char> is_root(n, 0);
    for (NodeId v = 0; v < n; ++v) is_root[root_of[leader[v]]] = 1;

    MinorNetwork net(g);
    const auto rf = root_forest(net, forest, is_root, seed);
    EXPECT_EQ(validate_forest(g, rf), "") << "seed " << seed;
    EXPECT_EQ(rf.in_forest, forest);
    for (NodeId v = 0; v < n; ++v) EXPECT_EQ(rf.is_root(v), is_root[v] != 0);
    const auto depth = oracle::tree_depths(g, rf.parent, rf.parent_edge);
    for (NodeId v = 0; v < n; ++v) EXPECT_NEAR(rf.depth_dist[v], depth[v], 1e-9 * (1 + depth[v]));
    // Parent pointers follow forest edges toward the root: the DFS oracle from
    // the root must produce the same orientation.
    for (NodeId v = 0; v < n; ++v) {
      if (rf.is_root(v)) continue;
      EXPECT_TRUE(forest[rf.parent_edge[v]]);
      EXPECT_EQ(g.edge(rf.parent_edge[v]).other(v), rf.parent[v]);
    }
    EXPECT_LE(net.rounds(), 40u * (ceil_log2(n) + 2)) << "seed " << seed;
  }
}

TEST(RootForest, Errors) {
  const Graph tri = testing::triangle();
  MinorNetwork net(tri);
  EXPECT_EQ(code_of([&] { root_forest(net, all_edges(tri), root_mask(3, {0}), 1); }), ErrorCode::not_a_forest);
  const Graph p = testing::path3();
  MinorNetwork pn(p);
  EXPECT_EQ(code_of([&] { root_forest(pn, {1, 1}, root_mask(3, {0, 2}), 1); }), ErrorCode::invalid_argument);
  EXPECT_EQ(code_of([&] { root_forest(pn, {1, 0}, root_mask(3, {0}), 1); }), ErrorCode::invalid_argument);
}

RootedForest bfs_tree(const Graph &g, NodeId root) {
  MinorNetwork net(g);
  const auto sp = oracle::dijkstra(g, root);
  std::vector<char> forest(g.num_edges(), 0);
  for (NodeId v = 0; v < g.num_nodes(); ++v)
    if (v != root) forest[sp.parent_edge[v]] = 1;
  return root_forest(net, forest, root_mask(g.num_nodes(), {root}), 99);
}

TEST(SubtreeSums, Star) {
  std::vector<Edge> edges;
  for (NodeId v = 1; v < 9; ++v) edges.push_back({0, v, 1});
  const Graph g = make_graph(9, edges);
  const auto rf = bfs_tree(g, 0);
  MinorNetwork net(g);
  const auto s = subtree_sums(net, rf, NodeVector(9, 1.0), 4);
  EXPECT_EQ(s.desc[0], 9.0);
  EXPECT_EQ(s.anc[0], 0.0);
  for (NodeId v = 1; v < 9; ++v) {
    EXPECT_EQ(s.desc[v], 1.0);
    EXPECT_EQ(s.anc[v], 1.0);
  }
  const auto z = subtree_sums(net, rf, NodeVector(9), 4);
  EXPECT_EQ(z.desc, NodeVector(9));
  EXPECT_EQ(z.anc, NodeVector(9));
}

TEST(SubtreeSums, MatchDfsOracle) {
  for (std::uint64_t seed = 0; seed < 60; ++seed) {
    const std::size_t n = 2 + seed * 2;
    const Graph g = seed % 3 == 0 ? generate("path:" + std::to_string(n) + ":unit")
                                  : random_graph(n, 0.1, 100, seed);
    const auto rf = bfs_tree(g, static_cast<NodeId>(seed % n));
    Rng rng(seed);
    const auto x = testing::random_node_vector(n, rng);
    MinorNetwork net(g);
    const auto s = subtree_sums(net, rf, x, seed);
    const auto ref = oracle::dfs_tree_sums(rf.parent, x);
    for (NodeId v = 0; v < n; ++v) {
      EXPECT_NEAR(s.desc[v], ref.desc[v], 1e-9) << "seed " << seed << " v " << v;
      EXPECT_NEAR(s.anc[v], ref.anc[v], 1e-9) << "seed " << seed << " v " << v;
      if (!rf.is_root(v)) EXPECT_NEAR(s.anc[v], s.anc[rf.parent[v]] + x[rf.parent[v]], 1e-9);
    }
    const TreeSweep sweep(rf);
    const auto d2 = sweep.descendant_sums(x), a2 = sweep.ancestor_sums(x);
    for (NodeId v = 0; v < n; ++v) {
      EXPECT_NEAR(d2[v], ref.desc[v], 1e-9);
      EXPECT_NEAR(a2[v], ref.anc[v], 1e-9);
    }
    // A path is the worst case for contraction depth; the round count must
    // still stay logarithmic.
    EXPECT_LE(net.rounds(), 40u * (ceil_log2(n) + 2)) << "seed " << seed;
  }
}

std::vector<Arc> random_functional(const Graph &g, Rng &rng, double self_loop_p) {
  std::vector<Arc> arcs;
  for (NodeId v = 0; v < g.num_nodes(); ++v) {
    const auto nb = g.neighbors(v);
    if (rng.bernoulli(self_loop_p)) arcs.push_back({v, kNoEdge});
    else arcs.push_back({v, nb[rng.below(nb.size())].edge});
  }
  return arcs;
}

std::vector<char> oracle_cycles(const Graph &g, const std::vector<Arc> &arcs) {
  std::vector<NodeId> succ(g.num_nodes());
  for (const Arc &a : arcs) succ[a.from] = a.edge == kNoEdge ? a.from : g.edge(a.edge).other(a.from);
  return oracle::pointer_chasing_cycles(succ);
}

TEST(FindCycles, AllSelfLoops) {
  const Graph g = random_graph(10, 0.3, 1, 1);
  std::vector<Arc> arcs;
  for (NodeId v = 0; v < 10; ++v) arcs.push_back({v, kNoEdge});
  MinorNetwork net(g);
  EXPECT_EQ(find_cycles(net, arcs, 1), std::vector<char>(10, 1));
}

TEST(FindCycles, DirectedFourCycle) {
  const Graph g = make_graph(4, {{0, 1, 1}, {1, 2, 1}, {2, 3, 1}, {0, 3, 1}});
  const std::vector<Arc> arcs{{0, 0}, {1, 1}, {2, 2}, {3, 3}};
  MinorNetwork net(g);
  EXPECT_EQ(find_cycles(net, arcs, 1), std::vector<char>(4, 1));
}

TEST(FindCycles, MatchesPointerChasing) {
  for (std::uint64_t seed = 0; seed < 60; ++seed) {
    const std::size_t n = seed < 30 ? 100 : 10 + seed;
    const Graph g = random_graph(n, seed % 2 ? 0.03 : 0.2, 1, seed);
    Rng rng(seed);
    const auto arcs = random_functional(g, rng, seed % 4 == 0 ? 0.02 : 0.0);
    MinorNetwork net(g);
    EXPECT_EQ(find_cycles(net, arcs, seed), oracle_cycles(g, arcs)) << "seed " << seed;
  }
}

TEST(FindCycles, LongCycleOnPath) {
  // Tree-shaped functional graph: every node points toward node 0 except
  // node 0 which points to node 1, giving a 2-cycle at the end of a long path.
  const std::size_t n = 300;
  const Graph g = generate("path:300:unit");
  std::vector<Arc> arcs{{0, 0}};
  for (NodeId v = 1; v < n; ++v) arcs.push_back({v, v - 1});
  MinorNetwork net(g);
  std::vector<char> expect(n, 0);
  expect[0] = expect[1] = 1;
  EXPECT_EQ(find_cycles(net, arcs, 3), expect);
}

TEST(FindCycles, Errors) {
  const Graph g = testing::path3();
  MinorNetwork net(g);
  const std::vector<Arc> missing{{0, 0}, {1, 0}};
  EXPECT_EQ(code_of([&] { find_cycles(net, missing, 1); }), ErrorCode::not_functional);
  const std::vector<Arc> doubled{{0, 0}, {1, 0}, {1, 1}, {2, 1}};
  EXPECT_EQ(code_of([&] { find_cycles(net, doubled, 1); }), ErrorCode::not_functional);
  const std::vector<Arc> foreign{{0, 1}, {1, 0}, {2, 1}};
  EXPECT_EQ(code_of([&] { find_cycles(net, foreign, 1); }), ErrorCode::not_functional);
}

TEST(Determinism, PipelinesAreReproducible) {
  const Graph g = random_graph(50, 0.1, 100, 12);
  auto run = [&] {
    MinorNetwork net(g);
    const auto rf = bfs_tree(g, 3);
    Rng rng(1);
    const auto s = subtree_sums(net, rf, testing::random_node_vector(50, rng), 17);
    return std::pair{s.desc, net.rounds()};
  };
  EXPECT_EQ(run(), run());
}

} // namespace
} // namespace lddflow
