#include <sstream>

#include "doctest.h"
#include "netrel/errors.hpp"
#include "netrel/graph.hpp"
#include "support.hpp"

using namespace netrel;

namespace {

UncertainGraph parse(const std::string& text) {
    std::istringstream in(text);
    return load_graph(in);
}

std::string load_error(const std::string& text) {
    try {
        parse(text);
    } catch (const DataError& e) {
        return e.what();
    }
    return "";
}

}  // namespace

TEST_CASE("single edge file") {
    const auto g = parse("0 1 0.7\n");
    CHECK(g.vertex_count() == 2);
    REQUIRE(g.edge_count() == 1);
    CHECK(g.edge(0).p == doctest::Approx(0.7));
}

TEST_CASE("comments, blank lines and file order") {
    const auto g = parse("# header\n\n0 1 0.5\n  # indented comment\n1 2 0.25\n2 0 1\n");
    REQUIRE(g.edge_count() == 3);
    CHECK(g.edge(1).u == 1);
    CHECK(g.edge(1).v == 2);
    CHECK(g.edge(2).p == 1.0);
    CHECK(g.degree(0) == 2);
}

TEST_CASE("load errors carry line numbers") {
    CHECK(load_error("0 1 0.5\n1 2 1.2\n") == "line 2: probability out of range");
    CHECK(load_error("0 1 0\n") == "line 1: probability out of range");
    CHECK(load_error("0 1 abc\n") == "line 1: invalid probability");
    CHECK(load_error("0 x 0.5\n") == "line 1: invalid vertex id");
    CHECK(load_error("0 -1 0.5\n") == "line 1: invalid vertex id");
    CHECK(load_error("0 1\n") == "line 1: expected `u v p`");
    CHECK(load_error("0 1 0.5\n2 3 0.5\n") == "graph is disconnected");
    CHECK(load_error("# nothing\n") == "graph has no edges");
}

TEST_CASE("self-loops are kept and show twice in the incidence list") {
    const auto g = parse("0 1 0.5\n1 1 0.5\n");
    CHECK(g.has_self_loop());
    CHECK(g.degree(1) == 3);
}

TEST_CASE("graph constructor validates") {
    CHECK_THROWS_AS(UncertainGraph(2, {{0, 2, 0.5}}), DataError);
    CHECK_THROWS_AS(UncertainGraph(2, {{0, 1, 1.5}}), DataError);
    CHECK_THROWS_AS(UncertainGraph(2, {{0, 1, -0.1}}), DataError);
}

TEST_CASE("terminal sets") {
    const TerminalSet t({5, 0, 9}, 10);
    CHECK(t.size() == 3);
    CHECK(t[0] == 0);
    CHECK(t[2] == 9);
    CHECK(t.contains(5));
    CHECK_FALSE(t.contains(4));
    CHECK_THROWS_AS(TerminalSet({1, 1}, 4), DataError);
    CHECK_THROWS_AS(TerminalSet({1}, 4), DataError);
    CHECK_THROWS_AS(TerminalSet({1, 4}, 4), DataError);
    CHECK(parse_terminal_list("0,5, 9") == std::vector<Vertex>{0, 5, 9});
    CHECK_THROWS_AS(parse_terminal_list("0,,1"), DataError);
    std::istringstream in("# t\n3\n\n7\n");
    CHECK(load_terminal_ids(in) == std::vector<Vertex>{3, 7});
}

TEST_CASE("edge list round-trips probabilities exactly") {
    CounterRng rng(4, 1);
    const auto g = testing::random_connected(rng, 8, 14);
    std::ostringstream out;
    write_edge_list(out, g);
    const auto h = parse(out.str());
    REQUIRE(h.edge_count() == g.edge_count());
    for (std::size_t i = 0; i < g.edge_count(); ++i) {
        CHECK(h.edge(i).u == g.edge(i).u);
        CHECK(h.edge(i).p == g.edge(i).p);
    }
}

TEST_CASE("assignment probability") {
    std::vector<Edge> six;
    for (int i = 0; i < 6; ++i) six.push_back({i, (i + 1) % 6, 0.7});
    const UncertainGraph g(6, six);
    using S = EdgeState;
    const EdgeStateAssignment a({S::Existent, S::Existent, S::NonExistent, S::Existent, S::NonExistent, S::Existent});
    // 0.7^4 * 0.3^2, quoted to four digits as 0.0216.
    CHECK(assignment_probability(g, a) == doctest::Approx(0.021609).epsilon(1e-12));
    CHECK(assignment_probability(g, a) == doctest::Approx(0.0216).epsilon(1e-3));
    CHECK(assignment_probability(g, EdgeStateAssignment(6, S::Uncertain)) == 1.0);
    const UncertainGraph two(2, {{0, 1, 0.5}, {0, 1, 0.5}});
    CHECK(assignment_probability(two, EdgeStateAssignment(2, S::Existent)) == 0.25);
    const Rational p(0.7), q = 1 - p;
    CHECK(assignment_probability<Rational>(g, a) == p * p * p * p * q * q);
}

TEST_CASE("possible graph probabilities sum to one") {
    CounterRng rng(11, 0);
    for (int trial = 0; trial < 5; ++trial) {
        const auto g = testing::random_connected(rng, 7, 12);
        KahanSum sum;
        Rational exact = 0;
        for (std::uint32_t mask = 0; mask < (1u << 12); ++mask) {
            std::vector<EdgeState> s(12);
            for (int i = 0; i < 12; ++i) s[i] = (mask >> i & 1) ? EdgeState::Existent : EdgeState::NonExistent;
            const EdgeStateAssignment a(s);
            sum += assignment_probability(g, a);
            exact += assignment_probability<Rational>(g, a);
        }
        CHECK(sum.value() == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(exact == 1);
    }
}

TEST_CASE("intermediate graph probability equals the sum over completions") {
    CounterRng rng(12, 0);
    const auto g = testing::random_connected(rng, 8, 14);
    std::vector<EdgeState> base(14, EdgeState::Uncertain);
    base[0] = EdgeState::Existent;
    base[3] = EdgeState::NonExistent;
    base[7] = EdgeState::Existent;
    base[10] = EdgeState::NonExistent;
    const EdgeStateAssignment inter(base);
    std::vector<int> free;
    for (int i = 0; i < 14; ++i)
        if (base[i] == EdgeState::Uncertain) free.push_back(i);
    REQUIRE(free.size() == 10);
    Rational total = 0;
    for (std::uint32_t mask = 0; mask < (1u << free.size()); ++mask) {
        auto s = base;
        for (std::size_t j = 0; j < free.size(); ++j)
            s[free[j]] = (mask >> j & 1) ? EdgeState::Existent : EdgeState::NonExistent;
        total += assignment_probability<Rational>(g, EdgeStateAssignment(s));
    }
    CHECK(total == assignment_probability<Rational>(g, inter));
}

TEST_CASE("sampling completes only uncertain edges") {
    const UncertainGraph g(3, {{0, 1, 0.3}, {1, 2, 0.3}});
    CounterRng rng(1, 2);
    const EdgeStateAssignment all_on(2, EdgeState::Existent);
    CHECK(sample_possible_graph(g, all_on, rng) == all_on);

    EdgeStateAssignment mixed(2, EdgeState::Uncertain);
    mixed[0] = EdgeState::NonExistent;
    for (int i = 0; i < 50; ++i) {
        const auto s = sample_possible_graph(g, mixed, rng);
        CHECK(s[0] == EdgeState::NonExistent);
        CHECK(s.is_possible_graph());
    }

    const UncertainGraph sure(2, {{0, 1, std::nextafter(1.0, 0.0)}});
    for (int i = 0; i < 1000; ++i)
        CHECK(sample_possible_graph(sure, EdgeStateAssignment(1, EdgeState::Uncertain), rng)[0] == EdgeState::Existent);
}

TEST_CASE("sampled edge frequency matches p") {
    const UncertainGraph g(2, {{0, 1, 0.7}});
    CounterRng rng(99, 0);
    int hits = 0;
    const int n = 100000;
    for (int i = 0; i < n; ++i)
        hits += sample_possible_graph(g, EdgeStateAssignment(1, EdgeState::Uncertain), rng)[0] == EdgeState::Existent;
    CHECK(std::abs(hits / double(n) - 0.7) < 0.01);
}

TEST_CASE("terminal connectivity") {
    const UncertainGraph path(3, {{0, 1, 0.5}, {1, 2, 0.5}});
    const TerminalSet ends({0, 2}, 3);
    CHECK(terminals_connected(path, EdgeStateAssignment(2, EdgeState::Existent), ends));
    EdgeStateAssignment cut(2, EdgeState::Existent);
    cut[1] = EdgeState::NonExistent;
    CHECK_FALSE(terminals_connected(path, cut, ends));
}

TEST_CASE("union-find connectivity agrees with matrix reachability") {
    CounterRng rng(5, 5);
    for (int trial = 0; trial < 300; ++trial) {
        const int n = 3 + testing::below(rng, 8);
        const auto g = testing::random_connected(rng, n, n - 1 + testing::below(rng, 8), true);
        const auto t = testing::random_terminal_set(rng, n, 2 + testing::below(rng, n - 1));
        const auto a = sample_possible_graph(g, EdgeStateAssignment(g.edge_count(), EdgeState::Uncertain), rng);
        std::vector<bool> present(g.edge_count());
        for (std::size_t i = 0; i < g.edge_count(); ++i) present[i] = a[i] == EdgeState::Existent;
        CHECK(terminals_connected(g, a, t) == testing::matrix_connected(g, present, t));
    }
}

TEST_CASE("counter rng streams are independent and replayable") {
    CounterRng a(7, stream_id({1, 2})), b(7, stream_id({1, 2})), c(7, stream_id({2, 1}));
    bool differs = false;
    for (int i = 0; i < 16; ++i) {
        const auto x = a(), y = b(), z = c();
        CHECK(x == y);
        differs = differs || x != z;
    }
    CHECK(differs);
    CounterRng u(3, 0);
    for (int i = 0; i < 1000; ++i) {
        const double v = u.uniform();
        CHECK(v >= 0.0);
        CHECK(v < 1.0);
    }
}
