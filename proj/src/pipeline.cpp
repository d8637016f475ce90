#include "netrel/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

#include "netrel/errors.hpp"
#include "netrel/exact.hpp"

namespace netrel {

namespace {

using json = nlohmann::ordered_json;

/// Rounds to the 12 significant digits reports are printed with.
double rounded(double v) { return std::stod(format_number(v)); }

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::vector<Vertex> original_terminals(const Subgraph& s) {
    std::vector<Vertex> out;
    for (Vertex t : s.terminals.vertices()) out.push_back(s.original[t]);
    std::sort(out.begin(), out.end());
    return out;
}

json timings_json(const PhaseTimings& t) {
    return {{"preprocess_seconds", t.preprocess_seconds},
            {"construct_seconds", t.construct_seconds},
            {"sample_seconds", t.sample_seconds}};
}

std::string precision_name(Precision p) { return p == Precision::Exact ? "exact" : "double"; }

}  // namespace

OutputFormat parse_format(std::string_view name) {
    if (name == "json") return OutputFormat::Json;
    if (name == "csv") return OutputFormat::Csv;
    if (name == "text") return OutputFormat::Text;
    throw UsageError("unknown format '" + std::string(name) + "'");
}

void RunConfig::validate() const {
    if (samples < 1) throw UsageError("--s must be at least 1");
    if (width < 1) throw UsageError("--w must be at least 1");
    if (threads < 1) throw UsageError("--threads must be at least 1");
}

PipelineReport run_estimate(const UncertainGraph& g, const TerminalSet& terminals, const RunConfig& config) {
    config.validate();
    PipelineReport r;
    r.config = config;
    const auto t0 = std::chrono::steady_clock::now();
    std::vector<Subgraph> parts;
    if (config.preprocess) {
        Decomposition d = preprocess(g, terminals, &r.preprocess);
        r.bridge_product = d.bridge_product;
        parts = std::move(d.parts);
    } else {
        parts.push_back(identity_subgraph(g, terminals));
    }
    r.timings.preprocess_seconds = seconds_since(t0);

    std::size_t total_edges = 0;
    for (const auto& p : parts) total_edges += p.graph.edge_count();

    Rational raw_product = from_double<Rational>(r.bridge_product);
    double estimate = r.bridge_product, lower = r.bridge_product, upper = r.bridge_product;
    double second_moment = r.bridge_product * r.bridge_product;
    bool exact = true;
    r.budget = {config.samples, 0};
    for (std::size_t i = 0; i < parts.size(); ++i) {
        const Subgraph& part = parts[i];
        PartReport pr;
        pr.vertices = part.graph.vertex_count();
        pr.edges = part.graph.edge_count();
        pr.terminals = original_terminals(part);
        const double share = static_cast<double>(config.samples) * static_cast<double>(pr.edges) /
                             static_cast<double>(std::max<std::size_t>(1, total_edges));
        const std::int64_t s_i = std::max<std::int64_t>(1, static_cast<std::int64_t>(std::floor(share)));
        Rational raw_part;
        if (!config.use_bdd) {
            pr.report = plain_sampling(part.graph, part.terminals, s_i, config.estimator, config.seed, i);
            raw_part = from_double<Rational>(pr.report.estimate);
        } else {
            ConstructionConfig cc;
            cc.max_width = config.width;
            cc.samples = s_i;
            cc.estimator = config.estimator;
            cc.seed = config.seed;
            cc.stream = i;
            cc.threads = config.threads;
            cc.hard_cap = config.width_cap;
            auto fill = [&](auto&& res) {
                pr.report = res.report;
                pr.deleted_nodes = res.deleted_nodes;
                pr.peak_width = res.peak_width;
                pr.trace = std::move(res.trace);
            };
            if (config.precision == Precision::Exact) {
                auto res = construct<Rational>(part.graph, part.terminals, cc);
                raw_part = res.report.exact ? res.p_c : from_double<Rational>(res.report.estimate);
                fill(std::move(res));
            } else {
                auto res = construct<double>(part.graph, part.terminals, cc);
                raw_part = from_double<Rational>(res.report.estimate);
                fill(std::move(res));
            }
        }
        if (config.precision == Precision::Exact) pr.raw = format_raw(raw_part);
        raw_product *= raw_part;
        const EstimateReport& rep = pr.report;
        estimate *= rep.estimate;
        lower *= rep.bounds.lower();
        upper *= rep.bounds.upper();
        second_moment *= rep.variance_estimate + rep.estimate * rep.estimate;
        exact = exact && rep.exact;
        r.budget.reduced += rep.budget.reduced;
        r.samples_drawn += rep.samples_drawn;
        r.timings.construct_seconds += rep.timings.construct_seconds;
        r.timings.sample_seconds += rep.timings.sample_seconds;
        r.parts.push_back(std::move(pr));
    }
    r.estimate = estimate;
    r.lower = lower;
    r.upper = upper;
    r.variance = std::max(0.0, second_moment - estimate * estimate);
    if (exact) r.variance = 0.0;
    r.exact = exact;
    if (config.precision == Precision::Exact) r.raw = format_raw(raw_product);
    return r;
}

nlohmann::ordered_json to_json(const PipelineReport& r) {
    json out;
    out["estimate"] = rounded(r.estimate);
    out["lower"] = rounded(r.lower);
    out["upper"] = rounded(r.upper);
    out["variance"] = rounded(r.variance);
    out["exact"] = r.exact;
    out["estimator"] = std::string(to_string(r.config.estimator));
    out["samples"] = {{"requested", r.budget.requested}, {"reduced", r.budget.reduced}, {"drawn", r.samples_drawn}};
    out["bridge_product"] = rounded(r.bridge_product);
    json parts = json::array();
    for (const auto& p : r.parts) {
        json j;
        j["vertices"] = p.vertices;
        j["edges"] = p.edges;
        j["terminals"] = p.terminals;
        j["estimate"] = rounded(p.report.estimate);
        j["lower"] = rounded(p.report.bounds.lower());
        j["upper"] = rounded(p.report.bounds.upper());
        j["variance"] = rounded(p.report.variance_estimate);
        j["exact"] = p.report.exact;
        j["samples"] = {{"requested", p.report.budget.requested},
                        {"reduced", p.report.budget.reduced},
                        {"drawn", p.report.samples_drawn}};
        j["deleted_nodes"] = p.deleted_nodes;
        j["peak_width"] = p.peak_width;
        if (!p.raw.empty()) j["raw"] = p.raw;
        if (r.config.timings) j["timings"] = timings_json(p.report.timings);
        parts.push_back(std::move(j));
    }
    out["parts"] = std::move(parts);
    if (r.config.preprocess)
        out["preprocess"] = {{"pruned_vertices", r.preprocess.pruned_vertices},
                             {"pruned_edges", r.preprocess.pruned_edges},
                             {"bridges", r.preprocess.bridges},
                             {"loops", r.preprocess.transforms.loops},
                             {"parallel", r.preprocess.transforms.parallel},
                             {"series", r.preprocess.transforms.series}};
    out["config"] = {{"s", r.config.samples},
                     {"w", r.config.width},
                     {"seed", r.config.seed},
                     {"precision", precision_name(r.config.precision)},
                     {"bdd", r.config.use_bdd},
                     {"preprocess", r.config.preprocess}};
    if (!r.raw.empty()) out["raw"] = r.raw;
    if (r.config.timings) out["timings"] = timings_json(r.timings);
    return out;
}

void write_report(std::ostream& out, const PipelineReport& r, OutputFormat format) {
    switch (format) {
    case OutputFormat::Json:
        out << to_json(r).dump(2) << '\n';
        break;
    case OutputFormat::Csv:
        out << "part,vertices,edges,estimate,lower,upper,variance,requested,reduced,drawn,exact\n";
        for (std::size_t i = 0; i < r.parts.size(); ++i) {
            const auto& p = r.parts[i];
            out << i << ',' << p.vertices << ',' << p.edges << ',' << format_number(p.report.estimate) << ','
                << format_number(p.report.bounds.lower()) << ',' << format_number(p.report.bounds.upper()) << ','
                << format_number(p.report.variance_estimate) << ',' << p.report.budget.requested << ','
                << p.report.budget.reduced << ',' << p.report.samples_drawn << ',' << (p.report.exact ? 1 : 0)
                << '\n';
        }
        out << "total,,," << format_number(r.estimate) << ',' << format_number(r.lower) << ','
            << format_number(r.upper) << ',' << format_number(r.variance) << ',' << r.budget.requested << ','
            << r.budget.reduced << ',' << r.samples_drawn << ',' << (r.exact ? 1 : 0) << '\n';
        break;
    case OutputFormat::Text:
        out << "reliability  " << format_number(r.estimate) << (r.exact ? "  (exact)" : "") << '\n'
            << "bounds       [" << format_number(r.lower) << ", " << format_number(r.upper) << "]\n"
            << "variance     " << format_number(r.variance) << '\n'
            << "samples      " << r.samples_drawn << " drawn, " << r.budget.reduced << " of "
            << r.budget.requested << " needed\n"
            << "parts        " << r.parts.size() << ", bridge product " << format_number(r.bridge_product) << '\n';
        if (!r.raw.empty()) out << "raw          " << r.raw << '\n';
        if (r.config.timings)
            out << "seconds      preprocess " << format_number(r.timings.preprocess_seconds, 4) << ", construct "
                << format_number(r.timings.construct_seconds, 4) << ", sample "
                << format_number(r.timings.sample_seconds, 4) << '\n';
        break;
    }
}

void write_trace(std::ostream& out, const PipelineReport& r) {
    out << "part,layer,width,p_c,p_d,deleted_mass,samples_drawn\n";
    for (std::size_t i = 0; i < r.parts.size(); ++i)
        for (const auto& row : r.parts[i].trace)
            out << i << ',' << row.layer << ',' << row.width << ',' << format_raw(row.p_c) << ','
                << format_raw(row.p_d) << ',' << format_raw(row.deleted_mass) << ',' << row.samples_drawn << '\n';
}

ExactMethod parse_exact_method(std::string_view name) {
    if (name == "auto") return ExactMethod::Auto;
    if (name == "brute") return ExactMethod::BruteForce;
    if (name == "bdd") return ExactMethod::Diagram;
    throw UsageError("unknown exact method '" + std::string(name) + "'");
}

namespace {

template <class Real>
Real exact_value(const UncertainGraph& g, const TerminalSet& t, bool brute, std::size_t width_cap) {
    if (brute) return brute_force_reliability<Real>(g, t).reliability;
    return exact_mode<Real>(g, t, width_cap);
}

template <class Real>
ExactReport exact_with(const UncertainGraph& g, const TerminalSet& terminals, ExactMethod method, bool preprocess_first,
                       std::size_t width_cap) {
    ExactReport r;
    r.edges = g.edge_count();
    const bool brute =
        method == ExactMethod::BruteForce || (method == ExactMethod::Auto && g.edge_count() <= kAutoBruteForceEdges);
    r.method = brute ? "brute" : "bdd";
    Real value;
    if (brute || !preprocess_first) {
        value = exact_value<Real>(g, terminals, brute, width_cap);
    } else {
        const Decomposition d = preprocess(g, terminals);
        value = from_double<Real>(d.bridge_product);
        for (const auto& part : d.parts) value *= exact_value<Real>(part.graph, part.terminals, false, width_cap);
    }
    r.reliability = to_double(value);
    r.raw = format_raw(value);
    return r;
}

}  // namespace

ExactReport run_exact(const UncertainGraph& g, const TerminalSet& terminals, ExactMethod method, Precision precision,
                      bool preprocess_first, std::size_t width_cap) {
    const auto t0 = std::chrono::steady_clock::now();
    ExactReport r = precision == Precision::Exact
                        ? exact_with<Rational>(g, terminals, method, preprocess_first, width_cap)
                        : exact_with<double>(g, terminals, method, preprocess_first, width_cap);
    if (precision == Precision::Double) r.raw.clear();
    r.seconds = seconds_since(t0);
    return r;
}

nlohmann::ordered_json to_json(const ExactReport& r, bool timings) {
    json out;
    out["reliability"] = rounded(r.reliability);
    out["method"] = r.method;
    out["edges"] = r.edges;
    if (!r.raw.empty()) out["raw"] = r.raw;
    if (timings) out["seconds"] = r.seconds;
    return out;
}

void write_report(std::ostream& out, const ExactReport& r, OutputFormat format, bool timings) {
    switch (format) {
    case OutputFormat::Json:
        out << to_json(r, timings).dump(2) << '\n';
        break;
    case OutputFormat::Csv:
        out << "reliability,method,edges" << (r.raw.empty() ? "" : ",raw") << (timings ? ",seconds" : "") << '\n'
            << format_number(r.reliability) << ',' << r.method << ',' << r.edges;
        if (!r.raw.empty()) out << ',' << r.raw;
        if (timings) out << ',' << format_number(r.seconds, 4);
        out << '\n';
        break;
    case OutputFormat::Text:
        out << "reliability  " << format_number(r.reliability) << "  (" << r.method << ")\n";
        if (!r.raw.empty()) out << "raw          " << r.raw << '\n';
        if (timings) out << "seconds      " << format_number(r.seconds, 4) << '\n';
        break;
    }
}

nlohmann::ordered_json write_preprocess(const std::string& dir, const Decomposition& d, const PreprocessStats& stats) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw DataError("cannot create directory " + dir + ": " + ec.message());
    json manifest;
    manifest["bridge_product"] = d.bridge_product;
    json parts = json::array();
    for (std::size_t i = 0; i < d.parts.size(); ++i) {
        const Subgraph& p = d.parts[i];
        const std::string name = "part_" + std::to_string(i) + ".txt";
        std::ofstream f(fs::path(dir) / name);
        if (!f) throw DataError("cannot write " + (fs::path(dir) / name).string());
        write_edge_list(f, p.graph);
        json j;
        j["file"] = name;
        j["vertices"] = p.graph.vertex_count();
        j["edges"] = p.graph.edge_count();
        j["terminals"] = std::vector<Vertex>(p.terminals.vertices().begin(), p.terminals.vertices().end());
        j["original_ids"] = p.original;
        parts.push_back(std::move(j));
    }
    manifest["parts"] = std::move(parts);
    manifest["stats"] = {{"pruned_vertices", stats.pruned_vertices},
                         {"pruned_edges", stats.pruned_edges},
                         {"bridges", stats.bridges},
                         {"loops", stats.transforms.loops},
                         {"parallel", stats.transforms.parallel},
                         {"series", stats.transforms.series}};
    std::ofstream mf(fs::path(dir) / "manifest.json");
    if (!mf) throw DataError("cannot write manifest in " + dir);
    mf << manifest.dump(2) << '\n';
    return manifest;
}

std::vector<Vertex> random_terminals(int vertex_count, int k, CounterRng& rng) {
    if (k < 2 || k > vertex_count) throw UsageError("k must lie between 2 and the vertex count");
    std::vector<Vertex> all(vertex_count);
    for (int v = 0; v < vertex_count; ++v) all[v] = v;
    for (int i = 0; i < k; ++i) {
        const auto j = i + static_cast<int>(rng() % static_cast<std::uint64_t>(vertex_count - i));
        std::swap(all[i], all[j]);
    }
    std::vector<Vertex> out(all.begin(), all.begin() + k);
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<BenchSummary> summarize(const std::vector<BenchRun>& runs) {
    std::vector<BenchSummary> out;
    std::map<std::string, std::size_t> index;
    std::vector<KahanSum> sq, rel, secs;
    for (const auto& run : runs) {
        auto [it, inserted] = index.emplace(run.method, out.size());
        if (inserted) {
            out.push_back({run.method});
            sq.emplace_back();
            rel.emplace_back();
            secs.emplace_back();
        }
        const std::size_t i = it->second;
        const double diff = run.reference - run.estimate;
        sq[i] += diff * diff;
        rel[i] += run.reference > 0.0 ? std::abs(diff) / run.reference : 0.0;
        secs[i] += run.seconds;
        ++out[i].runs;
    }
    for (std::size_t i = 0; i < out.size(); ++i) {
        const double n = static_cast<double>(out[i].runs);
        out[i].variance = sq[i].value() / n;
        out[i].error_rate = rel[i].value() / n;
        out[i].mean_seconds = secs[i].value() / n;
    }
    return out;
}

BenchReport run_bench(const UncertainGraph& g, const BenchConfig& config) {
    config.run.validate();
    if (config.searches < 1 || config.repetitions < 1) throw UsageError("--q1 and --q2 must be at least 1");
    for (const auto& m : config.methods)
        if (m != "s2bdd-mc" && m != "s2bdd-ht" && m != "plain-mc" && m != "plain-ht")
            throw UsageError("unknown bench method '" + m + "'");
    BenchReport report;
    report.exact_reference = config.exact_reference;
    for (int q = 0; q < config.searches; ++q) {
        CounterRng pick(config.run.seed, stream_id({0x7e4a, static_cast<std::uint64_t>(q)}));
        const auto tv = random_terminals(g.vertex_count(), config.k, pick);
        const TerminalSet terminals(tv, g.vertex_count());
        double reference = 0.0;
        if (config.exact_reference) {
            try {
                reference = run_exact(g, terminals, ExactMethod::Auto, Precision::Double, true,
                                      config.run.width_cap).reliability;
            } catch (const CapExceeded& e) {
                throw CapExceeded(std::string("exact reference unavailable (use --no-exact): ") + e.what());
            }
        }
        for (const auto& method : config.methods) {
            const std::size_t first = report.runs.size();
            for (int rep = 0; rep < config.repetitions; ++rep) {
                RunConfig rc = config.run;
                rc.use_bdd = method.rfind("s2bdd", 0) == 0;
                rc.estimator = method.ends_with("ht") ? EstimatorKind::HorvitzThompson : EstimatorKind::MonteCarlo;
                rc.seed = mix64(config.run.seed ^ stream_id({static_cast<std::uint64_t>(q),
                                                             static_cast<std::uint64_t>(rep)}));
                const auto t0 = std::chrono::steady_clock::now();
                const PipelineReport pr = run_estimate(g, terminals, rc);
                BenchRun run;
                run.search = q;
                run.repetition = rep;
                run.method = method;
                run.terminals = tv;
                run.reference = reference;
                run.estimate = pr.estimate;
                run.samples_drawn = pr.samples_drawn;
                run.seconds = seconds_since(t0);
                report.runs.push_back(std::move(run));
            }
            if (!config.exact_reference) {
                KahanSum mean;
                for (std::size_t i = first; i < report.runs.size(); ++i) mean += report.runs[i].estimate;
                const double m = mean.value() / config.repetitions;
                for (std::size_t i = first; i < report.runs.size(); ++i) report.runs[i].reference = m;
            }
        }
    }
    report.summary = summarize(report.runs);
    return report;
}

nlohmann::ordered_json to_json(const BenchReport& r, bool timings) {
    json out;
    out["reference"] = r.exact_reference ? "exact" : "mean";
    json summary = json::array();
    for (const auto& s : r.summary) {
        json j = {{"method", s.method}, {"runs", s.runs}, {"variance", rounded(s.variance)},
                  {"error_rate", rounded(s.error_rate)}};
        if (timings) j["mean_seconds"] = s.mean_seconds;
        summary.push_back(std::move(j));
    }
    out["summary"] = std::move(summary);
    json runs = json::array();
    for (const auto& run : r.runs) {
        json j = {{"search", run.search},         {"repetition", run.repetition},
                  {"method", run.method},         {"terminals", run.terminals},
                  {"reference", rounded(run.reference)}, {"estimate", rounded(run.estimate)},
                  {"samples_drawn", run.samples_drawn}};
        if (timings) j["seconds"] = run.seconds;
        runs.push_back(std::move(j));
    }
    out["runs"] = std::move(runs);
    return out;
}

void write_report(std::ostream& out, const BenchReport& r, OutputFormat format, bool timings) {
    switch (format) {
    case OutputFormat::Json:
        out << to_json(r, timings).dump(2) << '\n';
        break;
    case OutputFormat::Csv:
        out << "method,runs,variance,error_rate" << (timings ? ",mean_seconds" : "") << '\n';
        for (const auto& s : r.summary) {
            out << s.method << ',' << s.runs << ',' << format_number(s.variance) << ','
                << format_number(s.error_rate);
            if (timings) out << ',' << format_number(s.mean_seconds, 4);
            out << '\n';
        }
        break;
    case OutputFormat::Text:
        out << "reference " << (r.exact_reference ? "exact" : "per-search mean") << '\n';
        for (const auto& s : r.summary) {
            out << s.method << "  variance " << format_number(s.variance) << "  error rate "
                << format_number(s.error_rate);
            if (timings) out << "  mean " << format_number(s.mean_seconds, 4) << " s";
            out << '\n';
        }
        break;
    }
}

}  // namespace netrel
