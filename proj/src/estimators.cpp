#include "netrel/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace netrel {

std::string_view to_string(EstimatorKind kind) {
    return kind == EstimatorKind::MonteCarlo ? "mc" : "ht";
}

EstimatorKind parse_estimator(std::string_view name) {
    if (name == "mc") return EstimatorKind::MonteCarlo;
    if (name == "ht") return EstimatorKind::HorvitzThompson;
    throw std::invalid_argument("unknown estimator `" + std::string(name) + "`");
}

double mc_variance(double r_hat, std::int64_t s) {
    if (s < 1) throw std::invalid_argument("mc_variance: s must be positive");
    return r_hat * (1.0 - r_hat) / static_cast<double>(s);
}

double stratified_mc_variance(double r_hat, const Bounds& bounds, std::int64_t s) {
    if (s < 1) throw std::invalid_argument("stratified_mc_variance: s must be positive");
    constexpr double tol = 1e-12;
    if (r_hat < bounds.lower() - tol || r_hat > bounds.upper() + tol)
        throw std::domain_error("stratified_mc_variance: estimate outside [p_c, 1 - p_d]");
    const double v = (r_hat - bounds.p_c) * (bounds.upper() - r_hat) / static_cast<double>(s);
    return std::max(v, 0.0);
}

std::int64_t reduced_sample_count(std::int64_t s, const Bounds& b) {
    if (s <= 0) return 0;
    const double pc = b.p_c, pd = b.p_d;
    double cut;
    if (pc == 0.0)
        cut = pd;
    else if (pd == 0.0)
        cut = pc;
    else if (pc == pd)
        cut = 4.0 * pc * (1.0 - pc);
    else if (pc < pd)
        cut = 4.0 * pc * (1.0 - pd);
    else
        cut = std::min(4.0 * pc * (1.0 - pc), 4.0 * (pc * (1.0 - pd) + (pd - pc)));
    const double x = static_cast<double>(s) * (1.0 - cut);
    // Absorb representation error of decimal inputs (1 - 0.36 = 0.63999...).
    const double floored = std::floor(x + 1e-9 * std::max(1.0, std::abs(x)));
    return std::clamp<std::int64_t>(static_cast<std::int64_t>(floored), 0, s);
}

double mc_estimate(std::span<const StratumDraw> strata, const Bounds& bounds) {
    double r = bounds.p_c;
    for (const auto& st : strata) {
        if (st.successes > st.draws || st.successes < 0) throw std::invalid_argument("mc_estimate: successes > draws");
        if (st.draws == 0) {
            if (st.mass > 0.0) throw std::invalid_argument("mc_estimate: stratum with positive mass and no draws");
            continue;
        }
        r += st.mass * static_cast<double>(st.successes) / static_cast<double>(st.draws);
    }
    return std::clamp(r, bounds.lower(), std::max(bounds.lower(), bounds.upper()));
}

double inclusion_probability(double q, std::int64_t n) {
    if (q >= 1.0) return 1.0;
    return -std::expm1(static_cast<double>(n) * std::log1p(-q));
}

double ht_estimate(std::span<const HtStratum> strata, const Bounds& bounds) {
    double r = bounds.p_c;
    for (const auto& st : strata) {
        if (st.draws < 1) {
            if (st.mass > 0.0) throw std::invalid_argument("ht_estimate: stratum with positive mass and no draws");
            continue;
        }
        double within = 0.0;
        for (const auto& o : st.outcomes) {
            if (!(o.probability > 0.0)) throw std::invalid_argument("ht_estimate: zero draw probability");
            if (o.connected) within += o.probability / inclusion_probability(o.probability, st.draws);
        }
        r += st.mass * within;
    }
    return std::clamp(r, bounds.lower(), std::max(bounds.lower(), bounds.upper()));
}

double ht_variance(double r_hat, const Bounds& bounds, std::int64_t s, std::span<const HtOutcome> outcomes) {
    if (s < 1) throw std::invalid_argument("ht_variance: s must be positive");
    const double first = (bounds.p_c == 0.0 && bounds.p_d == 0.0) ? mc_variance(r_hat, s)
                                                                   : stratified_mc_variance(r_hat, bounds, s);
    double sq = 0.0;
    for (const auto& o : outcomes)
        if (o.connected) sq += o.probability * o.probability;
    const double sd = static_cast<double>(s);
    return std::max(0.0, first - (sd - 1.0) * sq / (2.0 * sd));
}

}  // namespace netrel
