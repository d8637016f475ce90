#pragma once

// Shared fixtures: random small graphs and an independent reliability
// oracle (recursive factoring on one edge at a time).

#include <algorithm>
#include <functional>
#include <set>
#include <utility>
#include <vector>

#include "netrel/graph.hpp"
#include "netrel/rng.hpp"

namespace testing {

using netrel::CounterRng;
using netrel::Edge;
using netrel::TerminalSet;
using netrel::UncertainGraph;
using netrel::Vertex;

inline int below(CounterRng& rng, int n) { return static_cast<int>(rng() % static_cast<std::uint64_t>(n)); }

/// Connected graph: random spanning tree plus random extra edges; parallel
/// edges allowed when `multi` is set.
inline UncertainGraph random_connected(CounterRng& rng, int n, int m, bool multi = false) {
    std::vector<Edge> edges;
    std::set<std::pair<int, int>> used;
    for (int v = 1; v < n; ++v) {
        const int u = below(rng, v);
        edges.push_back({u, v, 0.05 + 0.9 * rng.uniform()});
        used.emplace(u, v);
    }
    const int max_simple = n * (n - 1) / 2;
    while (static_cast<int>(edges.size()) < m) {
        int a = below(rng, n), b = below(rng, n);
        if (a == b) continue;
        if (a > b) std::swap(a, b);
        if (!multi) {
            if (static_cast<int>(used.size()) >= max_simple) break;
            if (!used.emplace(a, b).second) continue;
        }
        edges.push_back({a, b, 0.05 + 0.9 * rng.uniform()});
    }
    return UncertainGraph(n, std::move(edges));
}

/// A random core with an optional bridged block and pendant path, and an
/// optional series chain plus one duplicated edge.
inline UncertainGraph decorated(CounterRng& rng, int core, int extra, bool bridges, bool chains) {
    const auto base = random_connected(rng, core, core - 1 + extra);
    std::vector<Edge> edges(base.edges().begin(), base.edges().end());
    int n = core;
    auto p = [&] { return 0.1 + 0.85 * rng.uniform(); };
    if (bridges) {
        // Two blocks joined by a bridge, plus a pendant path.
        const int a = n, b = n + 1, c = n + 2;
        edges.push_back({below(rng, core), a, p()});
        edges.push_back({a, b, p()});
        edges.push_back({b, c, p()});
        edges.push_back({c, a, p()});
        edges.push_back({c, n + 3, p()});
        n += 4;
    }
    if (chains) {
        const int from = below(rng, core), to = below(rng, core);
        edges.push_back({from, n, p()});
        edges.push_back({n, n + 1, p()});
        edges.push_back({n + 1, to, p()});
        n += 2;
        const Edge dup = edges[below(rng, static_cast<int>(edges.size()))];
        edges.push_back({dup.u, dup.v, p()});
    }
    return UncertainGraph(n, edges);
}

inline TerminalSet random_terminal_set(CounterRng& rng, int n, int k) {
    std::vector<Vertex> all(n);
    for (int i = 0; i < n; ++i) all[i] = i;
    for (int i = 0; i < k; ++i) std::swap(all[i], all[i + below(rng, n - i)]);
    return TerminalSet(std::vector<Vertex>(all.begin(), all.begin() + k), n);
}

/// R by the factoring theorem: condition on each edge in turn, tracking
/// components with a plain label vector. Exponential, written for clarity.
inline double factoring_reliability(const UncertainGraph& g, const TerminalSet& t) {
    std::function<double(std::size_t, std::vector<int>)> rec = [&](std::size_t i, std::vector<int> label) -> double {
        const int l0 = label[t[0]];
        bool all = true;
        for (Vertex x : t.vertices()) all = all && label[x] == l0;
        if (all) return 1.0;
        if (i == g.edge_count()) return 0.0;
        const Edge& e = g.edge(i);
        double up = 0.0;
        if (label[e.u] != label[e.v]) {
            std::vector<int> merged = label;
            const int from = label[e.v], to = label[e.u];
            for (int& x : merged)
                if (x == from) x = to;
            up = rec(i + 1, std::move(merged));
        } else {
            up = rec(i + 1, label);
        }
        const double down = rec(i + 1, std::move(label));
        return e.p * up + (1.0 - e.p) * down;
    };
    std::vector<int> label(g.vertex_count());
    for (int v = 0; v < g.vertex_count(); ++v) label[v] = v;
    return rec(0, std::move(label));
}

/// Reachability via the transitive closure of the adjacency matrix.
inline bool matrix_connected(const UncertainGraph& g, const std::vector<bool>& present, const TerminalSet& t) {
    const int n = g.vertex_count();
    std::vector<std::vector<bool>> r(n, std::vector<bool>(n, false));
    for (int v = 0; v < n; ++v) r[v][v] = true;
    for (std::size_t i = 0; i < g.edge_count(); ++i)
        if (present[i]) r[g.edge(i).u][g.edge(i).v] = r[g.edge(i).v][g.edge(i).u] = true;
    for (int k = 0; k < n; ++k)
        for (int i = 0; i < n; ++i)
            if (r[i][k])
                for (int j = 0; j < n; ++j)
                    if (r[k][j]) r[i][j] = true;
    for (Vertex x : t.vertices())
        if (!r[t[0]][x]) return false;
    return true;
}

}  // namespace testing
