#include "netrel/reduction.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>
#include <unordered_map>

#include "netrel/errors.hpp"

namespace netrel {

StructureIndex build_structure_index(const UncertainGraph& g) {
    const int n = g.vertex_count();
    StructureIndex idx;
    std::vector<int> disc(n, -1), low(n, 0);
    std::vector<std::uint8_t> is_bridge(g.edge_count(), 0);
    struct Frame {
        Vertex v;
        int parent_edge;
        std::size_t next;
    };
    std::vector<Frame> stack;
    int timer = 0;
    for (Vertex root = 0; root < n; ++root) {
        if (disc[root] >= 0) continue;
        disc[root] = low[root] = timer++;
        stack.push_back({root, -1, 0});
        while (!stack.empty()) {
            Frame& f = stack.back();
            const auto inc = g.incident(f.v);
            if (f.next < inc.size()) {
                const int e = inc[f.next++];
                if (e == f.parent_edge) continue;
                const Edge& ed = g.edge(e);
                const Vertex w = ed.u == f.v ? ed.v : ed.u;
                if (disc[w] < 0) {
                    disc[w] = low[w] = timer++;
                    stack.push_back({w, e, 0});
                } else {
                    low[f.v] = std::min(low[f.v], disc[w]);
                }
                continue;
            }
            const Frame done = f;
            stack.pop_back();
            if (!stack.empty()) {
                Frame& parent = stack.back();
                low[parent.v] = std::min(low[parent.v], low[done.v]);
                if (low[done.v] > disc[parent.v]) is_bridge[done.parent_edge] = 1;
            }
        }
    }
    for (std::size_t e = 0; e < g.edge_count(); ++e)
        if (is_bridge[e]) {
            idx.bridges.push_back(static_cast<int>(e));
            idx.articulation_points.push_back(g.edge(e).u);
            idx.articulation_points.push_back(g.edge(e).v);
        }
    std::sort(idx.articulation_points.begin(), idx.articulation_points.end());
    idx.articulation_points.erase(std::unique(idx.articulation_points.begin(), idx.articulation_points.end()),
                                  idx.articulation_points.end());

    DisjointSets ds(n);
    for (std::size_t e = 0; e < g.edge_count(); ++e)
        if (!is_bridge[e]) ds.unite(g.edge(e).u, g.edge(e).v);
    idx.component_of.assign(n, -1);
    std::vector<int> id_of_root(n, -1);
    for (Vertex v = 0; v < n; ++v) {
        const int r = ds.find(v);
        if (id_of_root[r] < 0) id_of_root[r] = idx.component_count++;
        idx.component_of[v] = id_of_root[r];
    }
    return idx;
}

Subgraph identity_subgraph(const UncertainGraph& g, const TerminalSet& terminals) {
    std::vector<Vertex> ids(g.vertex_count());
    for (int v = 0; v < g.vertex_count(); ++v) ids[v] = v;
    return {g, terminals, std::move(ids)};
}

namespace {

/// Builds the subgraph induced by the kept edges over the kept vertices,
/// renumbering vertices in ascending order of their current ids.
Subgraph restrict(const Subgraph& in, const std::vector<std::uint8_t>& keep_vertex, const std::vector<Edge>& edges,
                  std::span<const Vertex> terminals) {
    const int n = in.graph.vertex_count();
    std::vector<int> remap(n, -1);
    std::vector<Vertex> original;
    for (Vertex v = 0; v < n; ++v)
        if (keep_vertex[v]) {
            remap[v] = static_cast<int>(original.size());
            original.push_back(in.original[v]);
        }
    std::vector<Edge> out_edges;
    out_edges.reserve(edges.size());
    for (const Edge& e : edges) out_edges.push_back({remap[e.u], remap[e.v], e.p});
    std::vector<Vertex> t;
    for (Vertex x : terminals) t.push_back(remap[x]);
    const int count = static_cast<int>(original.size());
    return {UncertainGraph(count, std::move(out_edges)), TerminalSet(std::move(t), count), std::move(original)};
}

}  // namespace

Subgraph prune(const Subgraph& in) {
    const UncertainGraph& g = in.graph;
    const StructureIndex idx = build_structure_index(g);
    const int c = idx.component_count;
    std::vector<std::vector<std::pair<int, int>>> tree(c);  // (neighbour component, bridge)
    for (int e : idx.bridges) {
        const int a = idx.component_of[g.edge(e).u], b = idx.component_of[g.edge(e).v];
        tree[a].push_back({b, e});
        tree[b].push_back({a, e});
    }
    std::vector<int> terminal_count(c, 0);
    for (Vertex t : in.terminals.vertices()) ++terminal_count[idx.component_of[t]];

    {
        DisjointSets ds(g.vertex_count());
        for (const Edge& e : g.edges()) ds.unite(e.u, e.v);
        const int r = ds.find(in.terminals[0]);
        for (Vertex t : in.terminals.vertices())
            if (ds.find(t) != r) throw DataError("terminals lie in different connected components");
    }

    // Strip terminal-free leaves of the bridge tree.
    std::vector<int> degree(c);
    std::vector<std::uint8_t> removed(c, 0);
    std::vector<int> leaves;
    for (int i = 0; i < c; ++i) {
        degree[i] = static_cast<int>(tree[i].size());
        if (degree[i] <= 1 && terminal_count[i] == 0) leaves.push_back(i);
    }
    while (!leaves.empty()) {
        const int x = leaves.back();
        leaves.pop_back();
        if (removed[x]) continue;
        removed[x] = 1;
        for (auto [y, e] : tree[x]) {
            (void)e;
            if (removed[y]) continue;
            if (--degree[y] <= 1 && terminal_count[y] == 0) leaves.push_back(y);
        }
    }

    std::vector<std::uint8_t> keep(g.vertex_count(), 0);
    for (Vertex v = 0; v < g.vertex_count(); ++v) keep[v] = !removed[idx.component_of[v]];
    std::vector<Edge> edges;
    for (const Edge& e : g.edges())
        if (keep[e.u] && keep[e.v]) edges.push_back(e);
    return restrict(in, keep, edges, in.terminals.vertices());
}

Decomposition decompose(const Subgraph& in) {
    const UncertainGraph& g = in.graph;
    const StructureIndex idx = build_structure_index(g);
    Decomposition out;
    std::vector<std::uint8_t> is_bridge(g.edge_count(), 0);
    for (int e : idx.bridges) is_bridge[e] = 1;

    // Every bridge must have terminals on both sides.
    if (!idx.bridges.empty()) {
        const std::vector<std::uint8_t> tmask = in.terminals.mask(g.vertex_count());
        for (int b : idx.bridges) {
            std::vector<std::uint8_t> seen(g.vertex_count(), 0);
            std::vector<Vertex> stack{g.edge(b).u};
            seen[g.edge(b).u] = 1;
            bool side_has_terminal = false;
            while (!stack.empty()) {
                const Vertex x = stack.back();
                stack.pop_back();
                side_has_terminal |= tmask[x] != 0;
                for (int e : g.incident(x)) {
                    if (e == b) continue;
                    const Vertex y = g.edge(e).u == x ? g.edge(e).v : g.edge(e).u;
                    if (!seen[y]) {
                        seen[y] = 1;
                        stack.push_back(y);
                    }
                }
            }
            const int inside = static_cast<int>(std::count_if(in.terminals.vertices().begin(), in.terminals.vertices().end(),
                                                              [&](Vertex t) { return seen[t] != 0; }));
            if (!side_has_terminal || inside == static_cast<int>(in.terminals.size()))
                throw std::invalid_argument("bridge with no terminal on one side; prune before decomposing");
            out.bridge_product *= g.edge(b).p;
        }
    }

    const int c = idx.component_count;
    std::vector<std::vector<Vertex>> members(c);
    for (Vertex v = 0; v < g.vertex_count(); ++v) members[idx.component_of[v]].push_back(v);
    std::vector<std::vector<Edge>> part_edges(c);
    for (std::size_t e = 0; e < g.edge_count(); ++e)
        if (!is_bridge[e]) part_edges[idx.component_of[g.edge(e).u]].push_back(g.edge(e));
    std::vector<std::vector<Vertex>> part_terminals(c);
    for (Vertex t : in.terminals.vertices()) part_terminals[idx.component_of[t]].push_back(t);
    for (Vertex a : idx.articulation_points) {
        auto& pt = part_terminals[idx.component_of[a]];
        if (std::find(pt.begin(), pt.end(), a) == pt.end()) pt.push_back(a);
    }
    for (int i = 0; i < c; ++i) {
        if (part_terminals[i].size() < 2) continue;
        std::vector<std::uint8_t> keep(g.vertex_count(), 0);
        for (Vertex v : members[i]) keep[v] = 1;
        out.parts.push_back(restrict(in, keep, part_edges[i], part_terminals[i]));
    }
    return out;
}

Subgraph transform(const Subgraph& in, TransformStats* stats) {
    const UncertainGraph& g = in.graph;
    const int n = g.vertex_count();
    TransformStats local;
    struct LiveEdge {
        Vertex u, v;
        double p;
        bool alive;
    };
    std::vector<LiveEdge> edges;
    std::vector<std::vector<int>> inc(n);
    std::map<std::pair<Vertex, Vertex>, int> by_pair;
    auto key = [](Vertex a, Vertex b) { return a < b ? std::pair{a, b} : std::pair{b, a}; };
    auto detach = [&](int e, Vertex x) {
        auto& list = inc[x];
        list.erase(std::find(list.begin(), list.end(), e));
    };
    std::vector<Vertex> work;
    const auto tmask = in.terminals.mask(n);

    // Adds an edge, folding it into an existing parallel edge; returns true
    // when it was folded (the endpoints lose a degree).
    auto add_edge = [&](Vertex a, Vertex b, double p) {
        if (a == b) {
            ++local.loops;
            return false;
        }
        auto [it, inserted] = by_pair.emplace(key(a, b), static_cast<int>(edges.size()));
        if (!inserted) {
            LiveEdge& e = edges[it->second];
            e.p = 1.0 - (1.0 - e.p) * (1.0 - p);
            ++local.parallel;
            return true;
        }
        edges.push_back({a, b, p, true});
        inc[a].push_back(it->second);
        inc[b].push_back(it->second);
        return false;
    };
    for (const Edge& e : g.edges()) add_edge(e.u, e.v, e.p);
    for (Vertex v = 0; v < n; ++v) work.push_back(v);
    while (!work.empty()) {
        const Vertex x = work.back();
        work.pop_back();
        if (tmask[x] || inc[x].size() != 2) continue;
        const int e1 = inc[x][0], e2 = inc[x][1];
        const Vertex a = edges[e1].u == x ? edges[e1].v : edges[e1].u;
        const Vertex b = edges[e2].u == x ? edges[e2].v : edges[e2].u;
        const double p = edges[e1].p * edges[e2].p;
        for (int e : {e1, e2}) {
            edges[e].alive = false;
            by_pair.erase(key(edges[e].u, edges[e].v));
            detach(e, edges[e].u);
            detach(e, edges[e].v);
        }
        ++local.series;
        add_edge(a, b, p);
        work.push_back(a);
        work.push_back(b);
    }

    std::vector<std::uint8_t> keep(n, 0);
    std::vector<Edge> out_edges;
    for (const LiveEdge& e : edges)
        if (e.alive) {
            out_edges.push_back({e.u, e.v, e.p});
            keep[e.u] = keep[e.v] = 1;
        }
    for (Vertex t : in.terminals.vertices()) keep[t] = 1;
    if (stats) {
        stats->loops += local.loops;
        stats->parallel += local.parallel;
        stats->series += local.series;
    }
    return restrict(in, keep, out_edges, in.terminals.vertices());
}

Decomposition preprocess(const UncertainGraph& g, const TerminalSet& terminals, PreprocessStats* stats) {
    PreprocessStats local;
    Decomposition out;
    {
        DisjointSets ds(g.vertex_count());
        for (const Edge& e : g.edges()) ds.unite(e.u, e.v);
        const int r = ds.find(terminals[0]);
        for (Vertex t : terminals.vertices())
            if (ds.find(t) != r) {
                out.bridge_product = 0.0;
                if (stats) *stats = local;
                return out;
            }
    }
    std::vector<Subgraph> pending{identity_subgraph(g, terminals)};
    while (!pending.empty()) {
        Subgraph cur = std::move(pending.back());
        pending.pop_back();
        ++local.rounds;
        const std::size_t before_edges = cur.graph.edge_count();
        const int before_vertices = cur.graph.vertex_count();
        Subgraph pruned = prune(cur);
        local.pruned_vertices += before_vertices - pruned.graph.vertex_count();
        local.pruned_edges += static_cast<int>(before_edges - pruned.graph.edge_count());
        Decomposition d = decompose(pruned);
        local.bridges += static_cast<int>(build_structure_index(pruned.graph).bridges.size());
        out.bridge_product *= d.bridge_product;
        for (Subgraph& part : d.parts) {
            Subgraph t = transform(part, &local.transforms);
            if (t.graph.edge_count() < before_edges || t.graph.vertex_count() < before_vertices) {
                pending.push_back(std::move(t));
            } else {
                out.parts.push_back(std::move(t));
            }
        }
    }
    std::reverse(out.parts.begin(), out.parts.end());
    std::stable_sort(out.parts.begin(), out.parts.end(), [](const Subgraph& a, const Subgraph& b) {
        return a.graph.edge_count() > b.graph.edge_count();
    });
    if (stats) *stats = local;
    return out;
}

}  // namespace netrel
