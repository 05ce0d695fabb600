#include <gtest/gtest.h>

#include <qgs/graph.hpp>

using namespace qgs;

namespace {

ErrorKind kind_of(const GraphSpec& s)
{
    try {
        build_graph(s);
    } catch (const Error& e) {
        return e.kind();
    }
    ADD_FAILURE() << "build_graph accepted an invalid spec";
    return ErrorKind::InvalidGraph;
}

GraphSpec two_vertex(std::vector<EdgeDecl> edges)
{
    GraphSpec s;
    s.name = "t";
    s.dim = 2;
    s.vertex_names = {"a", "b"};
    s.edges = std::move(edges);
    return s;
}

} // namespace

TEST(Builtin, StaneneDegrees)
{
    FundamentalGraph g = builtin("stanene");
    EXPECT_EQ(g.num_vertices(), 4);
    EXPECT_EQ(g.num_edges(), 5);
    EXPECT_EQ(g.degrees(), (std::vector<int>{4, 4, 1, 1}));
}

TEST(Builtin, LatticeThree)
{
    FundamentalGraph g = builtin("lattice(3)");
    EXPECT_EQ(g.name(), "lattice3");
    EXPECT_EQ(g.num_vertices(), 1);
    EXPECT_EQ(g.num_edges(), 3);
    EXPECT_EQ(g.degree(0), 6);
    for (int k = 0; k < 3; ++k) {
        LatticeVector e(3, 0);
        e[k] = 1;
        EXPECT_EQ(g.edge(k).index, e);
        EXPECT_TRUE(g.edge(k).is_loop());
    }
}

TEST(Builtin, Graphene)
{
    FundamentalGraph g = builtin("graphene");
    ASSERT_EQ(g.num_edges(), 3);
    EXPECT_EQ(g.edge(0).index, (LatticeVector{1, 0}));
    EXPECT_EQ(g.edge(1).index, (LatticeVector{0, 1}));
    EXPECT_EQ(g.edge(2).index, (LatticeVector{0, 0}));
    for (const auto& e : g.edges()) {
        EXPECT_EQ(e.tail, 0);
        EXPECT_EQ(e.head, 1);
    }
}

TEST(Builtin, UnknownName)
{
    for (std::string name : {"kagome", "lattice1", "lattice", "lattice(x)", ""}) {
        try {
            builtin(name);
            ADD_FAILURE() << name;
        } catch (const Error& e) {
            EXPECT_EQ(e.kind(), ErrorKind::UnknownBuiltin) << name;
        }
    }
}

TEST(Builtin, EulerCounts)
{
    for (std::string name : {"graphene", "stanene", "lattice2", "lattice3", "lattice5"}) {
        FundamentalGraph g = builtin(name);
        EXPECT_LE(g.num_vertices() + g.dim(), g.num_edges() + 1) << name;
        EXPECT_EQ(g.total_degree(), 2 * g.num_edges()) << name;
    }
    EXPECT_EQ(builtin("stanene").num_vertices() + 2, builtin("stanene").num_edges() + 1);
}

TEST(BuildGraph, Errors)
{
    EXPECT_EQ(kind_of(two_vertex({{"e1", "a", "b", {0, 0}}, {"e2", "a", "b", {0, 0}}})), ErrorKind::RankDeficientIndices);
    EXPECT_EQ(kind_of(two_vertex({{"e1", "a", "a", {1, 0}}, {"e2", "b", "b", {0, 1}}})), ErrorKind::DisconnectedGraph);
    EXPECT_EQ(kind_of(two_vertex({{"e1", "a", "b", {1, 0, 0}}, {"e2", "a", "b", {0, 1}}})), ErrorKind::IndexArityMismatch);
    // a 3-vertex path: nu + d = 5 > nu* + 1 = 3
    GraphSpec s;
    s.name = "p";
    s.dim = 2;
    s.vertex_names = {"a", "b", "c"};
    s.edges = {{"e1", "a", "b", {1, 0}}, {"e2", "b", "c", {0, 1}}};
    EXPECT_EQ(kind_of(s), ErrorKind::EulerViolation);
    // parallel indices do not span Z^2
    EXPECT_EQ(kind_of(two_vertex({{"e1", "a", "b", {1, 1}}, {"e2", "a", "b", {2, 2}}, {"e3", "a", "b", {0, 0}}})),
              ErrorKind::RankDeficientIndices);
}

TEST(BuildGraph, LoopsCountTwice)
{
    FundamentalGraph g = build_graph(two_vertex({{"e1", "a", "a", {1, 0}}, {"e2", "a", "b", {0, 0}}, {"e3", "b", "b", {0, 1}}}));
    EXPECT_EQ(g.degrees(), (std::vector<int>{3, 3}));
    EXPECT_EQ(g.incident(0), (std::vector<int>{0, 0, 1}));
}

TEST(SpanningTree, Graphene)
{
    FundamentalGraph g = builtin("graphene");
    SpanningTreeInfo t = spanning_tree(g);
    EXPECT_EQ(t.tree_edges, (std::vector<int>{2}));
    ASSERT_EQ(t.bridge_cycles.size(), 2u);
    for (const auto& c : t.bridge_cycles) {
        EXPECT_EQ(c.edges.size(), 2u);
        EXPECT_EQ(c.index_sum, g.edge(c.edge).index);
    }
}

TEST(SpanningTree, LatticeHasNoTree)
{
    FundamentalGraph g = builtin("lattice2");
    SpanningTreeInfo t = spanning_tree(g);
    EXPECT_TRUE(t.tree_edges.empty());
    ASSERT_EQ(t.bridge_cycles.size(), 2u);
    for (const auto& c : t.bridge_cycles) EXPECT_EQ(c.edges.size(), 1u);
}

TEST(SpanningTree, Stanene)
{
    FundamentalGraph g = builtin("stanene");
    SpanningTreeInfo t = spanning_tree(g);
    EXPECT_EQ(t.tree_edges, (std::vector<int>{2, 3, 4}));
    ASSERT_EQ(t.bridge_cycles.size(), 2u);
    EXPECT_EQ(t.bridge_cycles[0].edge, 0);
    EXPECT_EQ(t.bridge_cycles[0].index_sum, (LatticeVector{1, 0}));
    for (const auto& c : t.bridge_cycles) EXPECT_LE(static_cast<int>(c.edges.size()), g.num_vertices());
}

TEST(SpanningTree, Deterministic)
{
    for (std::string name : {"graphene", "stanene", "lattice3"}) {
        FundamentalGraph g = builtin(name);
        SpanningTreeInfo a = spanning_tree(g), b = spanning_tree(g);
        EXPECT_EQ(a.tree_edges, b.tree_edges);
        ASSERT_EQ(a.bridge_cycles.size(), b.bridge_cycles.size());
        for (std::size_t i = 0; i < a.bridge_cycles.size(); ++i) EXPECT_EQ(a.bridge_cycles[i].edges, b.bridge_cycles[i].edges);
    }
}

TEST(SpanningTree, TreeIsAcyclicAndSpanning)
{
    for (std::string name : {"graphene", "stanene", "lattice2"}) {
        FundamentalGraph g = builtin(name);
        SpanningTreeInfo t = spanning_tree(g);
        EXPECT_EQ(static_cast<int>(t.tree_edges.size()), g.num_vertices() - 1);
        detail::UnionFind uf(g.num_vertices());
        for (int e : t.tree_edges) EXPECT_TRUE(uf.unite(g.edge(e).tail, g.edge(e).head));
        EXPECT_EQ(t.bridge_cycles.size(), static_cast<std::size_t>(g.num_edges() - g.num_vertices() + 1));
    }
}

TEST(Normalize, StaneneIsIdentity)
{
    FundamentalGraph g = builtin("stanene");
    FundamentalGraph n = normalize_indices(g, spanning_tree(g));
    for (int e = 0; e < g.num_edges(); ++e) EXPECT_EQ(n.edge(e).index, g.edge(e).index);
}

TEST(Normalize, ShiftedGrapheneRezeroed)
{
    // moving v2 by (2,-1) shifts every index by the same vector; reuse the unshifted tree {e3}
    GraphSpec s = builtin_spec("graphene");
    for (auto& e : s.edges) {
        e.index[0] += 2;
        e.index[1] -= 1;
    }
    FundamentalGraph g = build_graph(s);
    FundamentalGraph ref = builtin("graphene");
    SpanningTreeInfo t = spanning_tree(ref);
    FundamentalGraph n = normalize_indices(g, t);
    EXPECT_TRUE(detail::is_zero(n.edge(2).index));
    for (const auto& c : t.bridge_cycles) EXPECT_EQ(detail::cycle_sum(n, c), detail::cycle_sum(g, c));
    for (int e = 0; e < 3; ++e) EXPECT_EQ(n.edge(e).index, ref.edge(e).index);
}

TEST(Normalize, LatticeIsIdentity)
{
    FundamentalGraph g = builtin("lattice3");
    FundamentalGraph n = normalize_indices(g, spanning_tree(g));
    for (int e = 0; e < 3; ++e) EXPECT_EQ(n.edge(e).index, g.edge(e).index);
}

TEST(Normalize, PreservesCycleSumsOnRandomShifts)
{
    GraphSpec base = builtin_spec("stanene");
    std::vector<LatticeVector> shift = {{0, 0}, {3, -2}, {-1, 4}, {5, 5}};
    GraphSpec s = base;
    for (auto& e : s.edges) {
        int u = e.tail == "v1" ? 0 : e.tail == "v2" ? 1 : e.tail == "v3" ? 2 : 3;
        int v = e.head == "v1" ? 0 : e.head == "v2" ? 1 : e.head == "v3" ? 2 : 3;
        for (int k = 0; k < 2; ++k) e.index[k] += shift[v][k] - shift[u][k];
    }
    FundamentalGraph g = build_graph(s);
    SpanningTreeInfo t = spanning_tree(g);
    FundamentalGraph n = normalize_indices(g, t);
    for (int e : t.tree_edges) EXPECT_TRUE(detail::is_zero(n.edge(e).index));
    for (const auto& c : t.bridge_cycles) EXPECT_EQ(detail::cycle_sum(n, c), detail::cycle_sum(g, c));
}

TEST(Bipartite, Builtins)
{
    auto g = is_bipartite(builtin("graphene"));
    ASSERT_TRUE(g.has_value());
    EXPECT_EQ(g->part0, (std::vector<int>{0}));
    EXPECT_EQ(g->part1, (std::vector<int>{1}));

    auto s = is_bipartite(builtin("stanene"));
    ASSERT_TRUE(s.has_value());
    EXPECT_EQ(s->part0, (std::vector<int>{0, 3}));
    EXPECT_EQ(s->part1, (std::vector<int>{1, 2}));

    EXPECT_FALSE(is_bipartite(builtin("lattice2")).has_value());
}

TEST(Bipartite, EveryEdgeCrosses)
{
    FundamentalGraph g = builtin("stanene");
    auto b = is_bipartite(g);
    ASSERT_TRUE(b);
    for (const auto& e : g.edges()) EXPECT_NE(b->color[e.tail], b->color[e.head]);
}
