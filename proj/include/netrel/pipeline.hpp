#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "netrel/graph.hpp"
#include "netrel/reduction.hpp"
#include "netrel/s2bdd.hpp"

namespace netrel {

enum class OutputFormat { Json, Csv, Text };
OutputFormat parse_format(std::string_view name);

struct RunConfig {
    std::int64_t samples = 10000;
    std::size_t width = 10000;
    EstimatorKind estimator = EstimatorKind::MonteCarlo;
    std::uint64_t seed = 0;
    unsigned threads = 1;
    Precision precision = Precision::Double;
    bool use_bdd = true;
    bool preprocess = true;
    /// Wall-clock phase timings are left out of reports unless asked for, so
    /// reports of identical runs compare byte for byte.
    bool timings = false;
    std::size_t width_cap = 4'000'000;

    /// Throws UsageError unless s >= 1, w >= 1 and threads >= 1.
    void validate() const;
};

struct PartReport {
    int vertices = 0;
    std::size_t edges = 0;
    std::vector<Vertex> terminals;  // original ids
    EstimateReport report;
    std::size_t deleted_nodes = 0;
    std::size_t peak_width = 0;
    std::vector<LayerTrace> trace;
    std::string raw;  // exact-precision rendering of the part estimate
};

struct PipelineReport {
    double estimate = 0.0;
    double lower = 0.0;
    double upper = 1.0;
    double variance = 0.0;
    bool exact = false;
    double bridge_product = 1.0;
    SampleBudget budget;
    std::int64_t samples_drawn = 0;
    std::vector<PartReport> parts;
    PreprocessStats preprocess;
    PhaseTimings timings;
    std::string raw;
    RunConfig config;
};

/// Preprocess, build a diagram per part with the sample budget split by edge
/// count, and multiply the part estimates by the bridge product.
PipelineReport run_estimate(const UncertainGraph& g, const TerminalSet& terminals, const RunConfig& config);

nlohmann::ordered_json to_json(const PipelineReport& r);
void write_report(std::ostream& out, const PipelineReport& r, OutputFormat format);
/// Per-layer rows `part,layer,width,p_c,p_d,deleted_mass,samples_drawn`.
void write_trace(std::ostream& out, const PipelineReport& r);

enum class ExactMethod { Auto, BruteForce, Diagram };
ExactMethod parse_exact_method(std::string_view name);

/// Edge counts up to this use brute force under ExactMethod::Auto.
inline constexpr std::size_t kAutoBruteForceEdges = 20;

struct ExactReport {
    double reliability = 0.0;
    std::string raw;
    std::string method;
    std::size_t edges = 0;
    double seconds = 0.0;
};

ExactReport run_exact(const UncertainGraph& g, const TerminalSet& terminals, ExactMethod method,
                      Precision precision, bool preprocess, std::size_t width_cap = 4'000'000);

nlohmann::ordered_json to_json(const ExactReport& r, bool timings);
void write_report(std::ostream& out, const ExactReport& r, OutputFormat format, bool timings);

/// Writes part_<i>.txt edge lists (compact ids) and manifest.json into `dir`.
nlohmann::ordered_json write_preprocess(const std::string& dir, const Decomposition& d, const PreprocessStats& stats);

struct BenchConfig {
    int k = 5;
    int searches = 10;      // q1
    int repetitions = 10;   // q2
    bool exact_reference = true;
    std::vector<std::string> methods{"s2bdd-mc", "s2bdd-ht", "plain-mc", "plain-ht"};
    RunConfig run;
};

struct BenchRun {
    int search = 0;
    int repetition = 0;
    std::string method;
    std::vector<Vertex> terminals;
    double reference = 0.0;
    double estimate = 0.0;
    std::int64_t samples_drawn = 0;
    double seconds = 0.0;
};

struct BenchSummary {
    std::string method;
    double variance = 0.0;
    double error_rate = 0.0;
    double mean_seconds = 0.0;
    std::int64_t runs = 0;
};

struct BenchReport {
    std::vector<BenchRun> runs;
    std::vector<BenchSummary> summary;
    bool exact_reference = true;
};

/// q1 random terminal sets, each estimated q2 times per method. Against the
/// exact reliability when available; with `exact_reference` off, against the
/// per-search mean of each method. Throws CapExceeded when the exact
/// reference is required but out of reach.
BenchReport run_bench(const UncertainGraph& g, const BenchConfig& config);

/// Recomputes the per-method aggregates from the runs.
std::vector<BenchSummary> summarize(const std::vector<BenchRun>& runs);

nlohmann::ordered_json to_json(const BenchReport& r, bool timings);
void write_report(std::ostream& out, const BenchReport& r, OutputFormat format, bool timings);

/// k distinct vertices drawn uniformly.
std::vector<Vertex> random_terminals(int vertex_count, int k, CounterRng& rng);

}  // namespace netrel
