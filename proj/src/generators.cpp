#include "netrel/generators.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>
#include <string>

namespace netrel {

namespace {

std::uint64_t below(CounterRng& rng, std::uint64_t n) {
    return static_cast<std::uint64_t>(rng.uniform() * static_cast<double>(n)) % n;
}

void require(bool ok, const char* what) {
    if (!ok) throw std::invalid_argument(what);
}

}  // namespace

Topology karate_topology() {
    static constexpr int kEdges[78][2] = {
        {0, 1},   {0, 2},   {0, 3},   {0, 4},   {0, 5},   {0, 6},   {0, 7},   {0, 8},   {0, 10},  {0, 11},
        {0, 12},  {0, 13},  {0, 17},  {0, 19},  {0, 21},  {0, 31},  {1, 2},   {1, 3},   {1, 7},   {1, 13},
        {1, 17},  {1, 19},  {1, 21},  {1, 30},  {2, 3},   {2, 7},   {2, 8},   {2, 9},   {2, 13},  {2, 27},
        {2, 28},  {2, 32},  {3, 7},   {3, 12},  {3, 13},  {4, 6},   {4, 10},  {5, 6},   {5, 10},  {5, 16},
        {6, 16},  {8, 30},  {8, 32},  {8, 33},  {9, 33},  {13, 33}, {14, 32}, {14, 33}, {15, 32}, {15, 33},
        {18, 32}, {18, 33}, {19, 33}, {20, 32}, {20, 33}, {22, 32}, {22, 33}, {23, 25}, {23, 27}, {23, 29},
        {23, 32}, {23, 33}, {24, 25}, {24, 27}, {24, 31}, {25, 31}, {26, 29}, {26, 33}, {27, 33}, {28, 31},
        {28, 33}, {29, 32}, {29, 33}, {30, 32}, {30, 33}, {31, 32}, {31, 33}, {32, 33}};
    Topology t;
    t.vertex_count = 34;
    for (const auto& e : kEdges) t.edges.emplace_back(e[0], e[1]);
    return t;
}

Topology grid_topology(int rows, int cols) {
    require(rows >= 1 && cols >= 1 && rows * cols >= 2, "grid needs at least two cells");
    Topology t;
    t.vertex_count = rows * cols;
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) {
            const int v = r * cols + c;
            if (c + 1 < cols) t.edges.emplace_back(v, v + 1);
            if (r + 1 < rows) t.edges.emplace_back(v, v + cols);
        }
    return t;
}

Topology scale_free_topology(int vertices, int attach, CounterRng& rng) {
    require(attach >= 1, "attachment count must be positive");
    require(vertices > attach, "scale-free graph needs more vertices than the attachment count");
    Topology t;
    t.vertex_count = vertices;
    std::vector<Vertex> ends;  // each vertex once per incident edge
    // Seed clique-free start: a star on the first attach+1 vertices.
    for (int v = 1; v <= attach; ++v) {
        t.edges.emplace_back(0, v);
        ends.push_back(0);
        ends.push_back(v);
    }
    for (int v = attach + 1; v < vertices; ++v) {
        std::set<Vertex> targets;
        while (static_cast<int>(targets.size()) < attach) targets.insert(ends[below(rng, ends.size())]);
        for (Vertex u : targets) {
            t.edges.emplace_back(u, v);
            ends.push_back(u);
            ends.push_back(v);
        }
    }
    return t;
}

Topology random_topology(int vertices, int edges, CounterRng& rng) {
    require(vertices >= 2, "random graph needs at least two vertices");
    const long long max_edges = static_cast<long long>(vertices) * (vertices - 1) / 2;
    require(edges >= vertices - 1 && edges <= max_edges, "edge count must lie between |V|-1 and |V|(|V|-1)/2");
    Topology t;
    t.vertex_count = vertices;
    std::set<std::pair<Vertex, Vertex>> used;
    for (int v = 1; v < vertices; ++v) {
        const auto u = static_cast<Vertex>(below(rng, v));
        t.edges.emplace_back(u, v);
        used.emplace(u, v);
    }
    while (static_cast<int>(t.edges.size()) < edges) {
        auto a = static_cast<Vertex>(below(rng, vertices));
        auto b = static_cast<Vertex>(below(rng, vertices));
        if (a == b) continue;
        if (a > b) std::swap(a, b);
        if (used.emplace(a, b).second) t.edges.emplace_back(a, b);
    }
    return t;
}

Topology affiliation_topology(int groups, int members, int extra, CounterRng& rng) {
    require(groups >= 1 && members >= 1, "affiliation graph needs groups and members");
    require(members >= groups, "every group needs a member");
    require(extra >= groups - 1 && extra <= members, "extra memberships must chain the groups and fit the members");
    require(groups >= 2 || extra == 0, "a single group admits no second membership");
    Topology t;
    t.vertex_count = groups + members;
    std::vector<Vertex> member_ids(members);
    for (int i = 0; i < members; ++i) member_ids[i] = groups + i;
    std::vector<Vertex> primary(members);
    for (int i = 0; i < members; ++i) {
        primary[i] = i < groups ? i : static_cast<Vertex>(below(rng, groups));
        t.edges.emplace_back(primary[i], member_ids[i]);
    }
    // Members 0..groups-2 (primary group i) join group i+1, chaining everything.
    for (int i = 0; i < extra; ++i) {
        Vertex second;
        if (i < groups - 1) {
            second = i + 1;
        } else {
            do second = static_cast<Vertex>(below(rng, groups));
            while (second == primary[i]);
        }
        t.edges.emplace_back(second, member_ids[i]);
    }
    return t;
}

ProbabilityModel parse_probability_model(std::string_view name) {
    if (name == "uniform") return ProbabilityModel::Uniform;
    if (name == "log-degree") return ProbabilityModel::LogDegree;
    throw std::invalid_argument("unknown probability model '" + std::string(name) + "'");
}

double log_degree_probability(int alpha, int alpha_max) {
    require(alpha >= 0 && alpha <= alpha_max, "weight outside [0, max]");
    return std::log(alpha + 1.0) / std::log(alpha_max + 2.0);
}

UncertainGraph assign_probabilities(const Topology& topology, ProbabilityModel model, CounterRng& rng) {
    std::vector<Edge> edges;
    edges.reserve(topology.edges.size());
    if (model == ProbabilityModel::Uniform) {
        for (auto [u, v] : topology.edges) edges.push_back({u, v, 1.0 - rng.uniform()});
    } else {
        std::vector<int> deg(topology.vertex_count, 0);
        for (auto [u, v] : topology.edges) {
            ++deg[u];
            ++deg[v];
        }
        std::vector<int> alpha;
        for (auto [u, v] : topology.edges) alpha.push_back(std::min(deg[u], deg[v]));
        const int alpha_max = alpha.empty() ? 0 : *std::max_element(alpha.begin(), alpha.end());
        for (std::size_t i = 0; i < topology.edges.size(); ++i)
            edges.push_back({topology.edges[i].first, topology.edges[i].second, log_degree_probability(alpha[i], alpha_max)});
    }
    return UncertainGraph(topology.vertex_count, std::move(edges));
}

}  // namespace netrel
