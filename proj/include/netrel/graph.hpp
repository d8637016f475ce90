#pragma once

#include <cstdint>
#include <iosfwd>
#include <numeric>
#include <span>
#include <string_view>
#include <vector>

#include "netrel/probability.hpp"
#include "netrel/rng.hpp"

namespace netrel {

using Vertex = int;

struct Edge {
    Vertex u = 0;
    Vertex v = 0;
    double p = 1.0;
};

/// Undirected graph with independent per-edge existence probabilities.
/// Edge indices follow insertion order and are stable for the lifetime of the
/// graph; every diagram layer and sampling stream keys off them.
class UncertainGraph {
public:
    UncertainGraph() = default;

    /// Throws DataError when an endpoint is out of range or p is outside (0, 1].
    UncertainGraph(int vertex_count, std::vector<Edge> edges);

    int vertex_count() const { return vertex_count_; }
    std::size_t edge_count() const { return edges_.size(); }
    const Edge& edge(std::size_t i) const { return edges_[i]; }
    std::span<const Edge> edges() const { return edges_; }

    /// Indices of the edges incident to `v` (a self-loop appears twice).
    std::span<const int> incident(Vertex v) const {
        return {incidence_.data() + offsets_[v], incidence_.data() + offsets_[v + 1]};
    }
    int degree(Vertex v) const { return offsets_[v + 1] - offsets_[v]; }

    bool is_connected() const;
    bool has_self_loop() const;

private:
    int vertex_count_ = 0;
    std::vector<Edge> edges_;
    std::vector<int> offsets_{0};
    std::vector<int> incidence_;
};

/// The k >= 2 distinct query vertices, kept sorted.
class TerminalSet {
public:
    TerminalSet() = default;
    /// Throws DataError on duplicates, out-of-range ids, or fewer than two terminals.
    TerminalSet(std::vector<Vertex> terminals, int vertex_count);

    std::size_t size() const { return terminals_.size(); }
    std::span<const Vertex> vertices() const { return terminals_; }
    Vertex operator[](std::size_t i) const { return terminals_[i]; }
    bool contains(Vertex v) const;

    /// Membership mask of length `vertex_count`.
    std::vector<std::uint8_t> mask(int vertex_count) const;

private:
    std::vector<Vertex> terminals_;
};

enum class EdgeState : std::uint8_t { NonExistent = 0, Existent = 1, Uncertain = 2 };

/// Tri-state assignment over edge indices. A possible graph is an assignment
/// without Uncertain entries; anything else denotes an intermediate graph.
class EdgeStateAssignment {
public:
    EdgeStateAssignment() = default;
    EdgeStateAssignment(std::size_t edge_count, EdgeState fill) : states_(edge_count, fill) {}
    explicit EdgeStateAssignment(std::vector<EdgeState> states) : states_(std::move(states)) {}

    std::size_t size() const { return states_.size(); }
    EdgeState operator[](std::size_t i) const { return states_[i]; }
    EdgeState& operator[](std::size_t i) { return states_[i]; }
    bool is_possible_graph() const;
    bool operator==(const EdgeStateAssignment&) const = default;

private:
    std::vector<EdgeState> states_;
};

/// Union-find with path halving and union by size; tracks a per-set payload
/// count (terminals) so connectivity of a terminal set is an O(1) query.
class DisjointSets {
public:
    explicit DisjointSets(int n = 0) { reset(n); }

    void reset(int n) {
        parent_.resize(n);
        size_.assign(n, 1);
        count_.assign(n, 0);
        std::iota(parent_.begin(), parent_.end(), 0);
    }
    int find(int x) {
        while (parent_[x] != x) {
            parent_[x] = parent_[parent_[x]];
            x = parent_[x];
        }
        return x;
    }
    /// Returns the new root.
    int unite(int a, int b) {
        a = find(a);
        b = find(b);
        if (a == b) return a;
        if (size_[a] < size_[b]) std::swap(a, b);
        parent_[b] = a;
        size_[a] += size_[b];
        count_[a] += count_[b];
        return a;
    }
    int& count(int root) { return count_[root]; }

private:
    std::vector<int> parent_;
    std::vector<int> size_;
    std::vector<int> count_;
};

/// Reads `u v p` lines; `#` starts a comment line. Verifies connectivity.
/// Self-loops are kept (preprocessing drops them). Errors carry the 1-based
/// line number.
UncertainGraph load_graph(std::istream& in);
UncertainGraph load_graph_file(const std::string& path);

/// Writes the edge-list format; probabilities round-trip exactly.
void write_edge_list(std::ostream& out, const UncertainGraph& g);

/// Parses "0,5,9".
std::vector<Vertex> parse_terminal_list(std::string_view text);
/// One vertex id per line, `#` comments allowed.
std::vector<Vertex> load_terminal_ids(std::istream& in);

/// Pr of the (possible or intermediate) graph: product of p(e) over existent
/// edges and 1 - p(e) over non-existent edges; uncertain edges contribute 1.
template <class Real = double>
Real assignment_probability(const UncertainGraph& g, const EdgeStateAssignment& a) {
    Real pr = 1;
    for (std::size_t i = 0; i < g.edge_count(); ++i) {
        const Real p = from_double<Real>(g.edge(i).p);
        if (a[i] == EdgeState::Existent)
            pr *= p;
        else if (a[i] == EdgeState::NonExistent)
            pr *= Real(1) - p;
    }
    return pr;
}

/// Completes every Uncertain entry of `base` independently: Existent with
/// probability p(e). Decided entries are preserved.
EdgeStateAssignment sample_possible_graph(const UncertainGraph& g, const EdgeStateAssignment& base,
                                          CounterRng& rng);

/// Indicator that every terminal lies in one component of the existent-edge
/// subgraph. `a` must be a possible graph.
bool terminals_connected(const UncertainGraph& g, const EdgeStateAssignment& a, const TerminalSet& t);

}  // namespace netrel
