#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <optional>
#include <queue>
#include <string>
#include <vector>

#include "errors.hpp"

namespace qgs {

using LatticeVector = std::vector<std::int64_t>;

struct EdgeDecl {
    std::string name;
    std::string tail;
    std::string head;
    LatticeVector index;

    bool operator==(const EdgeDecl&) const = default;
};

struct GraphSpec {
    std::string name;
    int dim = 0;
    std::vector<std::string> vertex_names;
    std::vector<EdgeDecl> edges;

    bool operator==(const GraphSpec&) const = default;
};

struct OrientedEdge {
    int id = 0;
    int tail = 0;
    int head = 0;
    LatticeVector index;

    bool is_loop() const { return tail == head; }
};

class FundamentalGraph;
FundamentalGraph build_graph(const GraphSpec& spec);

class FundamentalGraph {
public:
    const std::string& name() const { return name_; }
    int dim() const { return dim_; }
    int num_vertices() const { return static_cast<int>(vertex_names_.size()); }
    int num_edges() const { return static_cast<int>(edges_.size()); }
    const std::vector<std::string>& vertex_names() const { return vertex_names_; }
    const std::vector<std::string>& edge_names() const { return edge_names_; }
    const std::vector<OrientedEdge>& edges() const { return edges_; }
    const OrientedEdge& edge(int e) const { return edges_.at(e); }
    const std::vector<int>& degrees() const { return degrees_; }
    int degree(int v) const { return degrees_.at(v); }
    int total_degree() const { return std::accumulate(degrees_.begin(), degrees_.end(), 0); }

    // Edge ids incident to v, ascending; a loop appears twice.
    const std::vector<int>& incident(int v) const { return incident_.at(v); }

    int vertex_id(const std::string& label) const
    {
        auto it = std::find(vertex_names_.begin(), vertex_names_.end(), label);
        return it == vertex_names_.end() ? -1 : static_cast<int>(it - vertex_names_.begin());
    }

    int edge_id(const std::string& label) const
    {
        auto it = std::find(edge_names_.begin(), edge_names_.end(), label);
        return it == edge_names_.end() ? -1 : static_cast<int>(it - edge_names_.begin());
    }

    GraphSpec to_spec() const
    {
        GraphSpec s;
        s.name = name_;
        s.dim = dim_;
        s.vertex_names = vertex_names_;
        for (const auto& e : edges_)
            s.edges.push_back({edge_names_[e.id], vertex_names_[e.tail], vertex_names_[e.head], e.index});
        return s;
    }

private:
    friend FundamentalGraph build_graph(const GraphSpec& spec);

    std::string name_;
    int dim_ = 0;
    std::vector<std::string> vertex_names_;
    std::vector<std::string> edge_names_;
    std::vector<OrientedEdge> edges_;
    std::vector<int> degrees_;
    std::vector<std::vector<int>> incident_;
};

namespace detail {

inline std::int64_t gcd64(std::int64_t a, std::int64_t b)
{
    a = a < 0 ? -a : a;
    b = b < 0 ? -b : b;
    while (b != 0) {
        std::int64_t r = a % b;
        a = b;
        b = r;
    }
    return a;
}

// Integer row reduction with gcd normalisation; rows are reduced in place.
// Returns the rank of the given rows.
inline int integer_rank(std::vector<LatticeVector> rows, int ncols)
{
    int rank = 0;
    for (int col = 0; col < ncols && rank < static_cast<int>(rows.size()); ++col) {
        int piv = -1;
        for (int r = rank; r < static_cast<int>(rows.size()); ++r)
            if (rows[r][col] != 0) { piv = r; break; }
        if (piv < 0) continue;
        std::swap(rows[piv], rows[rank]);
        for (int r = rank + 1; r < static_cast<int>(rows.size()); ++r) {
            if (rows[r][col] == 0) continue;
            std::int64_t a = rows[rank][col], b = rows[r][col];
            std::int64_t g = gcd64(a, b);
            std::int64_t fa = b / g, fb = a / g;
            std::int64_t rg = 0;
            for (int c = 0; c < ncols; ++c) {
                rows[r][c] = rows[r][c] * fb - rows[rank][c] * fa;
                rg = gcd64(rg, rows[r][c]);
            }
            if (rg > 1)
                for (int c = 0; c < ncols; ++c) rows[r][c] /= rg;
        }
        ++rank;
    }
    return rank;
}

inline bool is_zero(const LatticeVector& v)
{
    return std::all_of(v.begin(), v.end(), [](std::int64_t x) { return x == 0; });
}

struct UnionFind {
    std::vector<int> parent;
    explicit UnionFind(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
    int find(int x)
    {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    }
    bool unite(int a, int b)
    {
        a = find(a);
        b = find(b);
        if (a == b) return false;
        parent[std::max(a, b)] = std::min(a, b);
        return true;
    }
};

} // namespace detail

inline bool is_identifier(const std::string& s)
{
    if (s.empty()) return false;
    return std::all_of(s.begin(), s.end(), [](char c) {
        return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_';
    });
}

inline FundamentalGraph build_graph(const GraphSpec& spec)
{
    if (spec.dim < 1) throw Error(ErrorKind::InvalidGraph, "dim must be positive");
    if (spec.vertex_names.empty()) throw Error(ErrorKind::InvalidGraph, "graph has no vertices");

    FundamentalGraph g;
    g.name_ = spec.name;
    g.dim_ = spec.dim;
    g.vertex_names_ = spec.vertex_names;
    for (std::size_t i = 0; i < spec.vertex_names.size(); ++i)
        for (std::size_t j = 0; j < i; ++j)
            if (spec.vertex_names[i] == spec.vertex_names[j])
                throw Error(ErrorKind::InvalidGraph, "duplicate vertex " + spec.vertex_names[i]);

    const int nv = static_cast<int>(spec.vertex_names.size());
    g.degrees_.assign(nv, 0);
    g.incident_.assign(nv, {});
    for (const auto& d : spec.edges) {
        if (std::find(g.edge_names_.begin(), g.edge_names_.end(), d.name) != g.edge_names_.end())
            throw Error(ErrorKind::InvalidGraph, "duplicate edge " + d.name);
        if (static_cast<int>(d.index.size()) != spec.dim)
            throw Error(ErrorKind::IndexArityMismatch,
                        "edge " + d.name + " has " + std::to_string(d.index.size()) + " index components, expected " +
                            std::to_string(spec.dim));
        OrientedEdge e;
        e.id = static_cast<int>(g.edges_.size());
        e.tail = g.vertex_id(d.tail);
        e.head = g.vertex_id(d.head);
        if (e.tail < 0 || e.head < 0)
            throw Error(ErrorKind::InvalidGraph, "edge " + d.name + " references an undeclared vertex");
        e.index = d.index;
        g.edge_names_.push_back(d.name);
        g.edges_.push_back(e);
        g.degrees_[e.tail] += 1;
        g.degrees_[e.head] += 1;
        g.incident_[e.tail].push_back(e.id);
        g.incident_[e.head].push_back(e.id);
    }
    for (auto& inc : g.incident_) std::sort(inc.begin(), inc.end());

    detail::UnionFind uf(nv);
    int components = nv;
    for (const auto& e : g.edges_)
        if (uf.unite(e.tail, e.head)) --components;
    if (components != 1)
        throw Error(ErrorKind::DisconnectedGraph,
                    "graph " + spec.name + " has " + std::to_string(components) + " connected components");

    std::vector<LatticeVector> rows;
    for (const auto& e : g.edges_) rows.push_back(e.index);
    if (detail::integer_rank(rows, spec.dim) < spec.dim)
        throw Error(ErrorKind::RankDeficientIndices,
                    "edge indices do not span a rank-" + std::to_string(spec.dim) + " lattice");

    if (nv + spec.dim > g.num_edges() + 1)
        throw Error(ErrorKind::EulerViolation, "vertices + dim exceeds edges + 1");
    return g;
}

struct TreeCycle {
    int edge = 0;                     // the non-tree edge closing the cycle
    std::vector<int> edges;           // cycle edges, starting with `edge`
    std::vector<int> signs;           // +1 when traversed along the edge orientation
    LatticeVector index_sum;          // signed sum of indices along the cycle
};

struct SpanningTreeInfo {
    std::vector<int> tree_edges;      // ascending ids
    std::vector<TreeCycle> bridge_cycles;
    std::vector<bool> in_tree;
};

namespace detail {

inline LatticeVector cycle_sum(const FundamentalGraph& g, const TreeCycle& c)
{
    LatticeVector s(g.dim(), 0);
    for (std::size_t i = 0; i < c.edges.size(); ++i)
        for (int k = 0; k < g.dim(); ++k) s[k] += c.signs[i] * g.edge(c.edges[i]).index[k];
    return s;
}

} // namespace detail

// Deterministic spanning tree: zero-index edges first, then ascending id, each accepted when it joins two
// components. The built-in lattices therefore keep their printed tree.
inline SpanningTreeInfo spanning_tree(const FundamentalGraph& g)
{
    const int nv = g.num_vertices();
    std::vector<int> order(g.num_edges());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        return detail::is_zero(g.edge(a).index) && !detail::is_zero(g.edge(b).index);
    });

    SpanningTreeInfo info;
    info.in_tree.assign(g.num_edges(), false);
    detail::UnionFind uf(nv);
    for (int e : order) {
        const auto& ed = g.edge(e);
        if (uf.unite(ed.tail, ed.head)) {
            info.in_tree[e] = true;
            info.tree_edges.push_back(e);
        }
    }
    std::sort(info.tree_edges.begin(), info.tree_edges.end());

    // tree adjacency for path recovery
    std::vector<std::vector<std::pair<int, int>>> adj(nv);
    for (int e : info.tree_edges) {
        adj[g.edge(e).tail].push_back({e, g.edge(e).head});
        adj[g.edge(e).head].push_back({e, g.edge(e).tail});
    }
    auto tree_path = [&](int from, int to) {
        // BFS from `from`; returns (edge, sign) steps walking from `from` to `to`
        std::vector<int> via(nv, -1), prev(nv, -1);
        std::vector<bool> seen(nv, false);
        std::queue<int> q;
        q.push(from);
        seen[from] = true;
        while (!q.empty()) {
            int x = q.front();
            q.pop();
            for (auto [e, y] : adj[x])
                if (!seen[y]) {
                    seen[y] = true;
                    via[y] = e;
                    prev[y] = x;
                    q.push(y);
                }
        }
        std::vector<std::pair<int, int>> steps;
        for (int x = to; x != from; x = prev[x]) {
            int e = via[x];
            steps.push_back({e, g.edge(e).head == x && g.edge(e).tail == prev[x] ? +1 : -1});
        }
        std::reverse(steps.begin(), steps.end());
        return steps;
    };

    for (int e = 0; e < g.num_edges(); ++e) {
        if (info.in_tree[e]) continue;
        TreeCycle c;
        c.edge = e;
        c.edges.push_back(e);
        c.signs.push_back(+1);
        for (auto [te, sg] : tree_path(g.edge(e).head, g.edge(e).tail)) {
            c.edges.push_back(te);
            c.signs.push_back(sg);
        }
        c.index_sum = detail::cycle_sum(g, c);
        info.bridge_cycles.push_back(std::move(c));
    }
    return info;
}

// Shifts vertex representatives so every tree edge carries the zero index.
inline FundamentalGraph normalize_indices(const FundamentalGraph& g, const SpanningTreeInfo& t)
{
    const int nv = g.num_vertices();
    std::vector<LatticeVector> pot(nv);
    std::vector<bool> done(nv, false);
    std::vector<std::vector<int>> adj(nv);
    for (int e : t.tree_edges) {
        adj[g.edge(e).tail].push_back(e);
        adj[g.edge(e).head].push_back(e);
    }
    std::queue<int> q;
    pot[0] = LatticeVector(g.dim(), 0);
    done[0] = true;
    q.push(0);
    while (!q.empty()) {
        int x = q.front();
        q.pop();
        for (int e : adj[x]) {
            const auto& ed = g.edge(e);
            int y = ed.tail == x ? ed.head : ed.tail;
            if (done[y]) continue;
            pot[y] = pot[x];
            for (int k = 0; k < g.dim(); ++k) pot[y][k] += (ed.tail == x ? 1 : -1) * ed.index[k];
            done[y] = true;
            q.push(y);
        }
    }
    GraphSpec s = g.to_spec();
    for (int e = 0; e < g.num_edges(); ++e) {
        const auto& ed = g.edge(e);
        for (int k = 0; k < g.dim(); ++k) s.edges[e].index[k] = ed.index[k] - pot[ed.head][k] + pot[ed.tail][k];
    }
    return build_graph(s);
}

struct Bipartition {
    std::vector<int> color;            // 0 or 1 per vertex
    std::vector<int> part0, part1;
};

inline std::optional<Bipartition> is_bipartite(const FundamentalGraph& g)
{
    const int nv = g.num_vertices();
    std::vector<int> color(nv, -1);
    for (int s = 0; s < nv; ++s) {
        if (color[s] >= 0) continue;
        color[s] = 0;
        std::queue<int> q;
        q.push(s);
        while (!q.empty()) {
            int x = q.front();
            q.pop();
            for (int e : g.incident(x)) {
                const auto& ed = g.edge(e);
                if (ed.is_loop()) return std::nullopt;
                int y = ed.tail == x ? ed.head : ed.tail;
                if (color[y] < 0) {
                    color[y] = 1 - color[x];
                    q.push(y);
                } else if (color[y] == color[x]) {
                    return std::nullopt;
                }
            }
        }
    }
    Bipartition b;
    b.color = color;
    for (int v = 0; v < nv; ++v) (color[v] == 0 ? b.part0 : b.part1).push_back(v);
    return b;
}

inline GraphSpec builtin_spec(const std::string& name)
{
    GraphSpec s;
    if (name == "graphene") {
        s.name = "graphene";
        s.dim = 2;
        s.vertex_names = {"v1", "v2"};
        s.edges = {{"e1", "v1", "v2", {1, 0}}, {"e2", "v1", "v2", {0, 1}}, {"e3", "v1", "v2", {0, 0}}};
        return s;
    }
    if (name == "stanene") {
        s.name = "stanene";
        s.dim = 2;
        s.vertex_names = {"v1", "v2", "v3", "v4"};
        s.edges = {{"e1", "v1", "v2", {1, 0}},
                   {"e2", "v1", "v2", {0, 1}},
                   {"e3", "v1", "v2", {0, 0}},
                   {"e4", "v1", "v3", {0, 0}},
                   {"e5", "v2", "v4", {0, 0}}};
        return s;
    }
    // lattice<d>, lattice(d), lattice<d> with d >= 2
    if (name.rfind("lattice", 0) == 0) {
        std::string rest = name.substr(7);
        if (!rest.empty() && rest.front() == '(' && rest.back() == ')') rest = rest.substr(1, rest.size() - 2);
        if (!rest.empty() && rest.size() <= 2 && std::all_of(rest.begin(), rest.end(), ::isdigit)) {
            int d = std::stoi(rest);
            if (d >= 2) {
                s.name = "lattice" + std::to_string(d);
                s.dim = d;
                s.vertex_names = {"v"};
                for (int k = 0; k < d; ++k) {
                    LatticeVector idx(d, 0);
                    idx[k] = 1;
                    s.edges.push_back({"e" + std::to_string(k + 1), "v", "v", idx});
                }
                return s;
            }
        }
    }
    throw Error(ErrorKind::UnknownBuiltin, "unknown builtin graph '" + name + "'");
}

inline FundamentalGraph builtin(const std::string& name) { return build_graph(builtin_spec(name)); }

} // namespace qgs
