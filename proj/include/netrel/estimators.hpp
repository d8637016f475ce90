#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace netrel {

/// Proven-connected mass p_c (1-sink) and proven-disconnected mass p_d
/// (0-sink); the reliability lies in [p_c, 1 - p_d].
struct Bounds {
    double p_c = 0.0;
    double p_d = 0.0;

    double lower() const { return p_c; }
    double upper() const { return 1.0 - p_d; }
    bool valid(double tol = 1e-9) const { return p_c >= 0.0 && p_d >= 0.0 && p_c + p_d <= 1.0 + tol; }
};

enum class EstimatorKind { MonteCarlo, HorvitzThompson };

std::string_view to_string(EstimatorKind kind);
EstimatorKind parse_estimator(std::string_view name);

struct SampleBudget {
    std::int64_t requested = 0;
    std::int64_t reduced = 0;
};

/// One stratum of the undecided mass: its probability mass, the number of
/// possible graphs drawn from it and how many connected the terminals.
struct StratumDraw {
    double mass = 0.0;
    std::int64_t draws = 0;
    std::int64_t successes = 0;
};

/// A distinct sampled unit with its probability conditioned on the stratum.
struct HtOutcome {
    double probability = 0.0;
    bool connected = false;
};

struct HtStratum {
    double mass = 0.0;
    std::int64_t draws = 0;
    std::vector<HtOutcome> outcomes;
};

double mc_variance(double r_hat, std::int64_t s);

/// (R - p_c)(1 - p_d - R) / s. Throws std::domain_error when R lies outside
/// the bounds.
double stratified_mc_variance(double r_hat, const Bounds& bounds, std::int64_t s);

/// Number of samples s' <= s that keeps the Monte Carlo (and Horvitz-Thompson)
/// variance at or below its s-sample value given the bounds.
std::int64_t reduced_sample_count(std::int64_t s, const Bounds& bounds);

/// p_c + sum_i mass_i * successes_i / draws_i, clamped to [p_c, 1 - p_d].
/// Throws std::invalid_argument for a stratum with positive mass and no draws.
double mc_estimate(std::span<const StratumDraw> strata, const Bounds& bounds);

/// Inclusion probability of a unit with probability q under n draws with
/// replacement: 1 - (1 - q)^n.
double inclusion_probability(double q, std::int64_t n);

/// Horvitz-Thompson estimate: within each stratum, mass * sum q/pi over
/// distinct connected units; offset by p_c and clamped like mc_estimate.
/// Throws std::invalid_argument on a zero unit probability.
double ht_estimate(std::span<const HtStratum> strata, const Bounds& bounds);

/// Simplified HT variance. `outcomes` carry unconditional probabilities.
/// With p_c = p_d = 0 this is R(1-R)/s - sum (s-1) I Pr^2 / (2s); otherwise
/// the first term uses the stratified form. Floored at zero.
double ht_variance(double r_hat, const Bounds& bounds, std::int64_t s, std::span<const HtOutcome> outcomes);

}  // namespace netrel
