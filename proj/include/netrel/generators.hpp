#pragma once

#include <string_view>
#include <utility>
#include <vector>

#include "netrel/graph.hpp"
#include "netrel/rng.hpp"

namespace netrel {

/// Simple connected graph without probabilities.
struct Topology {
    int vertex_count = 0;
    std::vector<std::pair<Vertex, Vertex>> edges;
};

/// Zachary's karate club: 34 vertices, 78 edges.
Topology karate_topology();

/// rows x cols lattice, 4-neighbourhood.
Topology grid_topology(int rows, int cols);

/// Preferential attachment: each new vertex links to `attach` distinct
/// existing vertices chosen by degree.
Topology scale_free_topology(int vertices, int attach, CounterRng& rng);

/// Random spanning tree plus uniformly chosen extra edges, `edges` in total.
Topology random_topology(int vertices, int edges, CounterRng& rng);

/// Bipartite affiliation graph: `groups` hub vertices and `members` leaves,
/// each leaf joined to one group, `extra` of them to a second one. The
/// second memberships first chain the groups together so the result is
/// connected. groups=5, members=136, extra=24 gives 141 vertices and 160
/// edges, shaped like the American Revolution affiliation network.
Topology affiliation_topology(int groups, int members, int extra, CounterRng& rng);

enum class ProbabilityModel { Uniform, LogDegree };

ProbabilityModel parse_probability_model(std::string_view name);

/// log(a+1)/log(aM+2) for an edge weight a and the maximum weight aM.
double log_degree_probability(int alpha, int alpha_max);

/// Uniform: p = 1 - U with U uniform on [0, 1). LogDegree: the weight of an
/// edge is the smaller endpoint degree.
UncertainGraph assign_probabilities(const Topology& topology, ProbabilityModel model, CounterRng& rng);

}  // namespace netrel
