#include <cmath>

#include "doctest.h"
#include "netrel/estimators.hpp"
#include "netrel/exact.hpp"
#include "netrel/s2bdd.hpp"
#include "support.hpp"

using namespace netrel;

TEST_CASE("plain Monte Carlo variance") {
    CHECK(mc_variance(0.5, 100) == doctest::Approx(0.0025));
    CHECK(mc_variance(0.0, 50) == 0.0);
    CHECK(mc_variance(1.0, 50) == 0.0);
    CHECK(mc_variance(0.3, 1000) == doctest::Approx(2.1e-4));
    CHECK_THROWS(mc_variance(0.5, 0));
}

TEST_CASE("variance with bounds") {
    CHECK(stratified_mc_variance(0.5, {0.2, 0.2}, 100) == doctest::Approx(0.0009));
    CHECK(stratified_mc_variance(0.3, {0.3, 0.1}, 100) == 0.0);
    CHECK(stratified_mc_variance(0.5, {0.0, 0.0}, 100) == doctest::Approx(mc_variance(0.5, 100)));
    CHECK_THROWS_AS(stratified_mc_variance(0.1, {0.2, 0.2}, 100), std::domain_error);
    CHECK_THROWS_AS(stratified_mc_variance(0.9, {0.2, 0.2}, 100), std::domain_error);
}

TEST_CASE("reduced sample count golden values") {
    CHECK(reduced_sample_count(10000, {0.0, 0.5}) == 5000);
    CHECK(reduced_sample_count(1000, {0.0, 0.0}) == 1000);
    CHECK(reduced_sample_count(10000, {0.1, 0.1}) == 6400);
    CHECK(reduced_sample_count(10000, {0.1, 0.2}) == 6800);
    CHECK(reduced_sample_count(10000, {0.3, 0.1}) == 7200);
    CHECK(reduced_sample_count(10000, {0.4, 0.0}) == 6000);
    CHECK(reduced_sample_count(0, {0.2, 0.3}) == 0);
    CHECK(reduced_sample_count(10000, {0.5, 0.5}) == 0);
}

TEST_CASE("reduced sample count never exceeds s on the simplex") {
    int violations = 0;
    for (int i = 0; i <= 100; ++i)
        for (int j = 0; i + j <= 100; ++j) {
            const auto r = reduced_sample_count(10000, {i / 100.0, j / 100.0});
            violations += r < 0 || r > 10000;
        }
    CHECK(violations == 0);
}

TEST_CASE("reduced sample count monotonicity") {
    // Along the region each case applies to, away from the p_c = 0 / p_d = 0 axes.
    const int s = 100000;
    for (int j = 1; j <= 50; ++j) {
        const double pd = j / 100.0;
        std::int64_t prev = s + 1;
        for (int i = 1; i <= j && i + j <= 100; ++i) {
            const auto r = reduced_sample_count(s, {i / 100.0, pd});
            CHECK(r <= prev);
            prev = r;
        }
    }
    for (int i = 1; i <= 50; ++i) {
        const double pc = i / 100.0;
        std::int64_t prev = s + 1;
        for (int j = 1; j <= i && i + j <= 100; ++j) {
            const auto r = reduced_sample_count(s, {pc, j / 100.0});
            CHECK(r <= prev);
            prev = r;
        }
    }
    // Across the whole simplex the closed form is not monotone: with
    // p_c < p_d, s' = s(1 - 4 p_c (1 - p_d)) grows with p_d.
    CHECK(reduced_sample_count(s, {0.1, 0.4}) > reduced_sample_count(s, {0.1, 0.2}));
}

TEST_CASE("stratified variance never exceeds plain variance") {
    int violations = 0;
    for (int i = 0; i <= 100; ++i)
        for (int j = 0; i + j <= 100; ++j) {
            const Bounds b{i / 100.0, j / 100.0};
            for (int r = 0; r <= 10; ++r) {
                const double rhat = b.lower() + (b.upper() - b.lower()) * r / 10.0;
                violations += stratified_mc_variance(rhat, b, 1000) > mc_variance(rhat, 1000) + 1e-18;
            }
        }
    CHECK(violations == 0);
}

TEST_CASE("Monte Carlo combination") {
    const StratumDraw one{0.4, 20, 10};
    CHECK(mc_estimate(std::span(&one, 1), {0.3, 0.3}) == doctest::Approx(0.5));
    CHECK(mc_estimate({}, {0.7, 0.3}) == doctest::Approx(0.7));
    const StratumDraw all{1.0, 100, 70};
    CHECK(mc_estimate(std::span(&all, 1), {0.0, 0.0}) == doctest::Approx(0.7));
    const StratumDraw empty{0.2, 0, 0};
    CHECK_THROWS_AS(mc_estimate(std::span(&empty, 1), {0.0, 0.0}), std::invalid_argument);
    const StratumDraw masked{0.0, 0, 0};
    CHECK(mc_estimate(std::span(&masked, 1), {0.4, 0.6}) == doctest::Approx(0.4));
    const StratumDraw bad{0.5, 3, 4};
    CHECK_THROWS(mc_estimate(std::span(&bad, 1), {0.0, 0.0}));
}

TEST_CASE("estimates stay within the bounds") {
    CounterRng rng(8, 8);
    for (int trial = 0; trial < 500; ++trial) {
        const double pc = 0.5 * rng.uniform(), pd = 0.5 * rng.uniform();
        const double u = 1 - pc - pd;
        std::vector<StratumDraw> strata;
        const StratumDraw st{u, 10, static_cast<std::int64_t>(rng() % 11)};
        strata.push_back(st);
        const double r = mc_estimate(strata, {pc, pd});
        CHECK(r >= pc);
        CHECK(r <= 1 - pd + 1e-15);
    }
}

TEST_CASE("Horvitz-Thompson inclusion probability") {
    CHECK(inclusion_probability(1.0, 5) == 1.0);
    CHECK(inclusion_probability(0.5, 1) == doctest::Approx(0.5));
    CHECK(inclusion_probability(0.5, 3) == doctest::Approx(0.875));
    CHECK(inclusion_probability(1e-20, 1000) == doctest::Approx(1e-17));
}

TEST_CASE("Horvitz-Thompson estimate") {
    HtStratum certain{0.6, 4, {{1.0, true}}};
    CHECK(ht_estimate(std::span(&certain, 1), {0.2, 0.2}) == doctest::Approx(0.8));
    HtStratum none{0.6, 4, {{0.3, false}, {0.2, false}}};
    CHECK(ht_estimate(std::span(&none, 1), {0.2, 0.2}) == doctest::Approx(0.2));
    HtStratum zero{1.0, 1, {{0.0, true}}};
    CHECK_THROWS_AS(ht_estimate(std::span(&zero, 1), {0.0, 0.0}), std::invalid_argument);
    // Two distinct units, s = 2: q / (1 - (1-q)^2).
    HtStratum two{1.0, 2, {{0.5, true}, {0.25, true}}};
    const double expect = 0.5 / 0.75 + 0.25 / (1 - 0.75 * 0.75);
    CHECK(ht_estimate(std::span(&two, 1), {0.0, 0.0}) == doctest::Approx(std::min(1.0, expect)));
}

TEST_CASE("Horvitz-Thompson on two parallel edges is unbiased") {
    const UncertainGraph g(2, {{0, 1, 0.5}, {0, 1, 0.5}});
    const TerminalSet t({0, 1}, 2);
    const int reps = 200;
    double sum = 0, sq = 0;
    for (int r = 0; r < reps; ++r) {
        const auto rep = plain_sampling(g, t, 50, EstimatorKind::HorvitzThompson, 1000 + r);
        sum += rep.estimate;
        sq += rep.estimate * rep.estimate;
    }
    const double mean = sum / reps;
    const double se = std::sqrt(std::max(0.0, sq / reps - mean * mean) / (reps - 1));
    // With 50 draws over four outcomes every outcome is almost always seen and
    // the spread collapses; each seen outcome then overshoots by q (1/pi - 1),
    // about 4e-7 in total, which the rare misses pay back.
    CHECK(std::abs(mean - 0.75) <= std::max(3 * se, 1e-6));
}

namespace {

double reference_ht_variance(double r, double pc, double pd, std::int64_t s, const std::vector<HtOutcome>& o) {
    const double first = (pc == 0 && pd == 0) ? r * (1 - r) / s : (r - pc) * (1 - pd - r) / s;
    double second = 0;
    for (const auto& x : o) second += (s - 1) * (x.connected ? 1.0 : 0.0) * x.probability * x.probability / (2.0 * s);
    return std::max(0.0, first - second);
}

}  // namespace

TEST_CASE("Horvitz-Thompson variance") {
    const std::vector<HtOutcome> tiny{{1e-12, true}, {1e-13, false}};
    CHECK(ht_variance(0.4, {0, 0}, 100, tiny) == doctest::Approx(mc_variance(0.4, 100)));
    const std::vector<HtOutcome> big{{0.3, true}, {0.2, true}};
    CHECK(ht_variance(0.4, {0, 0}, 1, big) == doctest::Approx(mc_variance(0.4, 1)));
    const std::vector<HtOutcome> synth{{0.05, true}, {0.02, false}, {0.01, true}, {0.004, true}};
    for (std::int64_t s : {2, 10, 1000})
        for (double r : {0.2, 0.35, 0.5}) {
            CHECK(ht_variance(r, {0, 0}, s, synth) == doctest::Approx(reference_ht_variance(r, 0, 0, s, synth)));
            CHECK(ht_variance(r, {0.1, 0.2}, s, synth) ==
                  doctest::Approx(reference_ht_variance(r, 0.1, 0.2, s, synth)));
        }
    CHECK(ht_variance(0.5, {0, 0}, 10, {{{0.9, true}}}) == 0.0);
}

TEST_CASE("stratified Monte Carlo is unbiased on small graphs") {
    CounterRng rng(404, 0);
    for (int trial = 0; trial < 6; ++trial) {
        const auto g = testing::random_connected(rng, 7, 13);
        const auto t = testing::random_terminal_set(rng, 7, 3);
        const double exact = brute_force_reliability(g, t).reliability;
        ConstructionConfig cfg;
        cfg.max_width = 2;
        cfg.samples = 200;
        const int reps = 100;
        double sum = 0, sq = 0;
        for (int r = 0; r < reps; ++r) {
            cfg.seed = 5000 + r;
            const double est = construct(g, t, cfg).report.estimate;
            sum += est;
            sq += est * est;
        }
        const double mean = sum / reps;
        const double se = std::sqrt(std::max(0.0, sq / reps - mean * mean) / (reps - 1));
        CHECK(std::abs(mean - exact) <= 3 * se + 1e-12);
    }
}

TEST_CASE("estimator names") {
    CHECK(parse_estimator("mc") == EstimatorKind::MonteCarlo);
    CHECK(parse_estimator("ht") == EstimatorKind::HorvitzThompson);
    CHECK(to_string(EstimatorKind::HorvitzThompson) == "ht");
    CHECK_THROWS_AS(parse_estimator("xx"), std::invalid_argument);
}
