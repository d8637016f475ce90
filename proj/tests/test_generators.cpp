#include <cmath>
#include <sstream>

#include "doctest.h"
#include "netrel/generators.hpp"
#include "netrel/reduction.hpp"

using namespace netrel;

TEST_CASE("grid arithmetic") {
    const auto t = grid_topology(5, 5);
    CHECK(t.vertex_count == 25);
    CHECK(t.edges.size() == 40);
    CHECK(grid_topology(1, 2).edges.size() == 1);
    CHECK_THROWS(grid_topology(1, 1));
}

TEST_CASE("karate") {
    const auto t = karate_topology();
    CHECK(t.vertex_count == 34);
    CHECK(t.edges.size() == 78);
    CounterRng rng(1, 0);
    CHECK(assign_probabilities(t, ProbabilityModel::Uniform, rng).is_connected());
}

TEST_CASE("generated graphs are connected and sized as asked") {
    CounterRng rng(42, 0);
    const auto sf = assign_probabilities(scale_free_topology(200, 2, rng), ProbabilityModel::Uniform, rng);
    CHECK(sf.vertex_count() == 200);
    CHECK(sf.edge_count() == 2 + 2 * 197);
    CHECK(sf.is_connected());
    const auto rnd = assign_probabilities(random_topology(50, 120, rng), ProbabilityModel::Uniform, rng);
    CHECK(rnd.edge_count() == 120);
    CHECK(rnd.is_connected());
    const auto aff = assign_probabilities(affiliation_topology(5, 136, 24, rng), ProbabilityModel::LogDegree, rng);
    CHECK(aff.vertex_count() == 141);
    CHECK(aff.edge_count() == 160);
    CHECK(aff.is_connected());
    CHECK_THROWS(random_topology(5, 20, rng));
    CHECK_THROWS(affiliation_topology(5, 10, 2, rng));
}

TEST_CASE("affiliation graph is tree-like") {
    CounterRng rng(3, 0);
    const auto g = assign_probabilities(affiliation_topology(5, 136, 24, rng), ProbabilityModel::Uniform, rng);
    // Single-membership leaves are all bridges.
    CHECK(build_structure_index(g).bridges.size() >= 136 - 24);
}

TEST_CASE("log-degree probabilities") {
    const int am = 9;
    const double top = log_degree_probability(am, am);
    CHECK(top == doctest::Approx(std::log(10.0) / std::log(11.0)));
    CHECK(top < 1.0);
    CHECK(log_degree_probability(0, am) == 0.0);
    CounterRng rng(1, 1);
    const auto g = assign_probabilities(grid_topology(3, 3), ProbabilityModel::LogDegree, rng);
    for (const auto& e : g.edges()) {
        CHECK(e.p > 0.0);
        CHECK(e.p < 1.0);
    }
    CHECK(parse_probability_model("log-degree") == ProbabilityModel::LogDegree);
    CHECK_THROWS(parse_probability_model("gaussian"));
}

TEST_CASE("uniform assignment is reproducible") {
    auto render = [](std::uint64_t seed) {
        CounterRng rng(seed, 0);
        const auto g = assign_probabilities(scale_free_topology(60, 3, rng), ProbabilityModel::Uniform, rng);
        std::ostringstream out;
        write_edge_list(out, g);
        return out.str();
    };
    CHECK(render(5) == render(5));
    CHECK(render(5) != render(6));
}
