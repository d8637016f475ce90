// netrel: k-terminal reliability of uncertain graphs.

#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "netrel/errors.hpp"
#include "netrel/exact.hpp"
#include "netrel/generators.hpp"
#include "netrel/pipeline.hpp"
#include "netrel/reduction.hpp"

namespace {

using namespace netrel;

enum Exit { kOk = 0, kUsage = 2, kData = 3, kCap = 4 };

struct Options {
    std::string graph;
    std::string terminals;
    std::string format = "json";
    std::string estimator = "mc";
    std::string precision = "double";
    std::string trace;
    std::string out;
    std::string method = "auto";
    RunConfig run;
    bool no_bdd = false;
    bool no_preprocess = false;
    // gen
    std::string type = "grid";
    std::string prob = "uniform";
    int rows = 5, cols = 5, vertices = 100, edges = 200, attach = 2;
    int groups = 5, members = 136, extra = 24;
    // bench
    int k = 5, q1 = 10, q2 = 10;
    bool no_exact = false;
    std::vector<std::string> methods;
};

TerminalSet read_terminals(const std::string& spec, const UncertainGraph& g) {
    if (spec.empty()) throw UsageError("--terminals is required");
    std::vector<Vertex> ids;
    if (spec[0] == '@') {
        std::ifstream f(spec.substr(1));
        if (!f) throw DataError("cannot open terminal file " + spec.substr(1));
        ids = load_terminal_ids(f);
    } else {
        ids = parse_terminal_list(spec);
    }
    return TerminalSet(std::move(ids), g.vertex_count());
}

void apply_common(Options& o) {
    o.run.estimator = parse_estimator(o.estimator);
    if (o.precision == "double")
        o.run.precision = Precision::Double;
    else if (o.precision == "exact")
        o.run.precision = Precision::Exact;
    else
        throw UsageError("--precision must be double or exact");
    o.run.use_bdd = !o.no_bdd;
    o.run.preprocess = !o.no_preprocess;
    o.run.validate();
}

std::ostream& output(Options& o, std::ofstream& file) {
    if (o.out.empty()) return std::cout;
    file.open(o.out);
    if (!file) throw DataError("cannot write " + o.out);
    return file;
}

int cmd_estimate(Options& o) {
    apply_common(o);
    const UncertainGraph g = load_graph_file(o.graph);
    const TerminalSet t = read_terminals(o.terminals, g);
    const PipelineReport r = run_estimate(g, t, o.run);
    std::ofstream file;
    write_report(output(o, file), r, parse_format(o.format));
    if (!o.trace.empty()) {
        std::ofstream tf(o.trace);
        if (!tf) throw DataError("cannot write " + o.trace);
        write_trace(tf, r);
    }
    return kOk;
}

int cmd_exact(Options& o) {
    apply_common(o);
    const UncertainGraph g = load_graph_file(o.graph);
    const TerminalSet t = read_terminals(o.terminals, g);
    const ExactReport r = run_exact(g, t, parse_exact_method(o.method), o.run.precision, o.run.preprocess,
                                    o.run.width_cap);
    std::ofstream file;
    write_report(output(o, file), r, parse_format(o.format), o.run.timings);
    return kOk;
}

int cmd_preprocess(Options& o) {
    if (o.out.empty()) throw UsageError("--out DIR is required");
    const UncertainGraph g = load_graph_file(o.graph);
    const TerminalSet t = read_terminals(o.terminals, g);
    PreprocessStats stats;
    const Decomposition d = preprocess(g, t, &stats);
    const auto manifest = write_preprocess(o.out, d, stats);
    std::cout << manifest.dump(2) << '\n';
    return kOk;
}

int cmd_gen(Options& o) {
    CounterRng rng(o.run.seed, stream_id({0x9e4}));
    Topology topo;
    try {
        if (o.type == "karate")
            topo = karate_topology();
        else if (o.type == "grid")
            topo = grid_topology(o.rows, o.cols);
        else if (o.type == "scale-free")
            topo = scale_free_topology(o.vertices, o.attach, rng);
        else if (o.type == "random")
            topo = random_topology(o.vertices, o.edges, rng);
        else if (o.type == "affiliation")
            topo = affiliation_topology(o.groups, o.members, o.extra, rng);
        else
            throw UsageError("unknown generator '" + o.type + "'");
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    ProbabilityModel model;
    try {
        model = parse_probability_model(o.prob);
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    const UncertainGraph g = assign_probabilities(topo, model, rng);
    std::ofstream file;
    write_edge_list(output(o, file), g);
    return kOk;
}

int cmd_bench(Options& o) {
    apply_common(o);
    const UncertainGraph g = load_graph_file(o.graph);
    BenchConfig bc;
    bc.k = o.k;
    bc.searches = o.q1;
    bc.repetitions = o.q2;
    bc.exact_reference = !o.no_exact;
    if (!o.methods.empty()) bc.methods = o.methods;
    bc.run = o.run;
    const BenchReport r = run_bench(g, bc);
    std::ofstream file;
    write_report(output(o, file), r, parse_format(o.format), o.run.timings);
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"netrel: k-terminal reliability of uncertain graphs"};
    app.require_subcommand(1);
    Options o;

    auto io = [&](CLI::App* c, bool terminals) {
        c->add_option("--graph", o.graph, "edge list: one `u v p` per line")->required();
        if (terminals) c->add_option("--terminals", o.terminals, "comma list or @FILE")->required();
        c->add_option("--format", o.format, "json|csv|text");
        c->add_option("--out", o.out, "output path (stdout by default)");
        c->add_flag("--timings", o.run.timings, "include wall-clock timings");
    };
    auto sampling = [&](CLI::App* c) {
        c->add_option("--s", o.run.samples, "sample budget");
        c->add_option("--w", o.run.width, "maximum diagram width");
        c->add_option("--estimator", o.estimator, "mc|ht");
        c->add_option("--seed", o.run.seed);
        c->add_option("--threads", o.run.threads, "sampling threads");
        c->add_option("--precision", o.precision, "double|exact");
        c->add_flag("--no-bdd", o.no_bdd, "plain sampling baseline");
        c->add_flag("--no-preprocess", o.no_preprocess, "skip pruning, decomposition and transforms");
        c->add_option("--width-cap", o.run.width_cap, "abort when a diagram layer exceeds this many nodes");
    };

    auto* est = app.add_subcommand("estimate", "estimate reliability");
    io(est, true);
    sampling(est);
    est->add_option("--trace", o.trace, "per-layer CSV");

    auto* exact = app.add_subcommand("exact", "exact reliability");
    io(exact, true);
    exact->add_option("--method", o.method, "auto|brute|bdd");
    exact->add_option("--precision", o.precision, "double|exact");
    exact->add_flag("--no-preprocess", o.no_preprocess);
    exact->add_option("--width-cap", o.run.width_cap);

    auto* pre = app.add_subcommand("preprocess", "write reduced parts and a manifest");
    pre->add_option("--graph", o.graph)->required();
    pre->add_option("--terminals", o.terminals)->required();
    pre->add_option("--out", o.out, "output directory")->required();

    auto* gen = app.add_subcommand("gen", "generate an uncertain graph");
    gen->add_option("--type", o.type, "karate|grid|scale-free|random|affiliation");
    gen->add_option("--prob", o.prob, "uniform|log-degree");
    gen->add_option("--seed", o.run.seed);
    gen->add_option("--rows", o.rows);
    gen->add_option("--cols", o.cols);
    gen->add_option("--vertices", o.vertices);
    gen->add_option("--edges", o.edges);
    gen->add_option("--attach", o.attach);
    gen->add_option("--groups", o.groups);
    gen->add_option("--members", o.members);
    gen->add_option("--extra", o.extra);
    gen->add_option("--out", o.out);

    auto* bench = app.add_subcommand("bench", "accuracy benchmark against exact reliability");
    io(bench, false);
    sampling(bench);
    bench->add_option("--k", o.k, "terminals per search");
    bench->add_option("--q1", o.q1, "random terminal sets");
    bench->add_option("--q2", o.q2, "repetitions per set");
    bench->add_option("--methods", o.methods, "s2bdd-mc s2bdd-ht plain-mc plain-ht")->delimiter(',');
    bench->add_flag("--no-exact", o.no_exact, "compare against the per-search mean");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kUsage;
    }

    try {
        if (*est) return cmd_estimate(o);
        if (*exact) return cmd_exact(o);
        if (*pre) return cmd_preprocess(o);
        if (*gen) return cmd_gen(o);
        if (*bench) return cmd_bench(o);
    } catch (const UsageError& e) {
        std::cerr << "netrel: " << e.what() << '\n';
        return kUsage;
    } catch (const std::invalid_argument& e) {
        std::cerr << "netrel: " << e.what() << '\n';
        return kUsage;
    } catch (const DataError& e) {
        std::cerr << "netrel: " << e.what() << '\n';
        return kData;
    } catch (const CapExceeded& e) {
        std::cerr << "netrel: " << e.what() << '\n';
        return kCap;
    } catch (const std::bad_alloc&) {
        std::cerr << "netrel: out of memory\n";
        return kCap;
    } catch (const std::exception& e) {
        std::cerr << "netrel: " << e.what() << '\n';
        return kData;
    }
    return kUsage;
}
