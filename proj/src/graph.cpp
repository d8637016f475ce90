#include "netrel/graph.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "netrel/errors.hpp"

namespace netrel {

UncertainGraph::UncertainGraph(int vertex_count, std::vector<Edge> edges)
    : vertex_count_(vertex_count), edges_(std::move(edges)) {
    if (vertex_count_ < 0) throw DataError("negative vertex count");
    std::vector<int> deg(vertex_count_, 0);
    for (std::size_t i = 0; i < edges_.size(); ++i) {
        const Edge& e = edges_[i];
        if (e.u < 0 || e.v < 0 || e.u >= vertex_count_ || e.v >= vertex_count_)
            throw DataError("edge " + std::to_string(i) + ": vertex id out of range");
        if (!(e.p > 0.0 && e.p <= 1.0))
            throw DataError("edge " + std::to_string(i) + ": probability out of range");
        ++deg[e.u];
        ++deg[e.v];
    }
    offsets_.assign(vertex_count_ + 1, 0);
    for (int v = 0; v < vertex_count_; ++v) offsets_[v + 1] = offsets_[v] + deg[v];
    incidence_.resize(offsets_.back());
    std::vector<int> fill(offsets_.begin(), offsets_.end() - 1);
    for (std::size_t i = 0; i < edges_.size(); ++i) {
        incidence_[fill[edges_[i].u]++] = static_cast<int>(i);
        incidence_[fill[edges_[i].v]++] = static_cast<int>(i);
    }
}

bool UncertainGraph::is_connected() const {
    if (vertex_count_ == 0) return true;
    DisjointSets ds(vertex_count_);
    int components = vertex_count_;
    for (const Edge& e : edges_)
        if (ds.find(e.u) != ds.find(e.v)) {
            ds.unite(e.u, e.v);
            --components;
        }
    return components == 1;
}

bool UncertainGraph::has_self_loop() const {
    return std::any_of(edges_.begin(), edges_.end(), [](const Edge& e) { return e.u == e.v; });
}

TerminalSet::TerminalSet(std::vector<Vertex> terminals, int vertex_count) : terminals_(std::move(terminals)) {
    std::sort(terminals_.begin(), terminals_.end());
    if (std::adjacent_find(terminals_.begin(), terminals_.end()) != terminals_.end())
        throw DataError("duplicate terminal");
    if (terminals_.size() < 2) throw DataError("at least two terminals are required");
    for (Vertex t : terminals_)
        if (t < 0 || t >= vertex_count) throw DataError("terminal " + std::to_string(t) + " is not a vertex");
}

bool TerminalSet::contains(Vertex v) const {
    return std::binary_search(terminals_.begin(), terminals_.end(), v);
}

std::vector<std::uint8_t> TerminalSet::mask(int vertex_count) const {
    std::vector<std::uint8_t> m(vertex_count, 0);
    for (Vertex t : terminals_) m[t] = 1;
    return m;
}

bool EdgeStateAssignment::is_possible_graph() const {
    return std::none_of(states_.begin(), states_.end(), [](EdgeState s) { return s == EdgeState::Uncertain; });
}

namespace {

std::string_view trim(std::string_view s) {
    const auto ws = " \t\r\n";
    const auto b = s.find_first_not_of(ws);
    if (b == std::string_view::npos) return {};
    return s.substr(b, s.find_last_not_of(ws) - b + 1);
}

template <class T>
bool parse_number(std::string_view tok, T& out) {
    auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), out);
    return ec == std::errc() && ptr == tok.data() + tok.size();
}

std::vector<std::string_view> split_ws(std::string_view line) {
    std::vector<std::string_view> toks;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
        std::size_t j = i;
        while (j < line.size() && line[j] != ' ' && line[j] != '\t') ++j;
        if (j > i) toks.push_back(line.substr(i, j - i));
        i = j;
    }
    return toks;
}

}  // namespace

UncertainGraph load_graph(std::istream& in) {
    std::vector<Edge> edges;
    int max_id = -1;
    std::string raw;
    int line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        const std::string_view line = trim(raw);
        if (line.empty() || line.front() == '#') continue;
        const auto where = "line " + std::to_string(line_no) + ": ";
        const auto toks = split_ws(line);
        if (toks.size() != 3) throw DataError(where + "expected `u v p`");
        Edge e;
        if (!parse_number(toks[0], e.u) || !parse_number(toks[1], e.v) || e.u < 0 || e.v < 0)
            throw DataError(where + "invalid vertex id");
        if (!parse_number(toks[2], e.p)) throw DataError(where + "invalid probability");
        if (!(e.p > 0.0 && e.p <= 1.0)) throw DataError(where + "probability out of range");
        max_id = std::max({max_id, e.u, e.v});
        edges.push_back(e);
    }
    if (edges.empty()) throw DataError("graph has no edges");
    UncertainGraph g(max_id + 1, std::move(edges));
    if (!g.is_connected()) throw DataError("graph is disconnected");
    return g;
}

UncertainGraph load_graph_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open graph file: " + path);
    return load_graph(in);
}

void write_edge_list(std::ostream& out, const UncertainGraph& g) {
    for (const Edge& e : g.edges()) out << e.u << ' ' << e.v << ' ' << format_number(e.p, 17) << '\n';
}

std::vector<Vertex> parse_terminal_list(std::string_view text) {
    std::vector<Vertex> ids;
    std::size_t start = 0;
    while (start <= text.size()) {
        auto end = text.find(',', start);
        if (end == std::string_view::npos) end = text.size();
        const auto tok = trim(text.substr(start, end - start));
        Vertex v;
        if (!parse_number(tok, v) || v < 0) throw DataError("invalid terminal id `" + std::string(tok) + "`");
        ids.push_back(v);
        start = end + 1;
    }
    return ids;
}

std::vector<Vertex> load_terminal_ids(std::istream& in) {
    std::vector<Vertex> ids;
    std::string raw;
    int line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        const auto line = trim(raw);
        if (line.empty() || line.front() == '#') continue;
        Vertex v;
        if (!parse_number(line, v) || v < 0)
            throw DataError("line " + std::to_string(line_no) + ": invalid terminal id");
        ids.push_back(v);
    }
    return ids;
}

EdgeStateAssignment sample_possible_graph(const UncertainGraph& g, const EdgeStateAssignment& base,
                                          CounterRng& rng) {
    EdgeStateAssignment out = base;
    for (std::size_t i = 0; i < g.edge_count(); ++i)
        if (out[i] == EdgeState::Uncertain)
            out[i] = rng.uniform() < g.edge(i).p ? EdgeState::Existent : EdgeState::NonExistent;
    return out;
}

bool terminals_connected(const UncertainGraph& g, const EdgeStateAssignment& a, const TerminalSet& t) {
    DisjointSets ds(g.vertex_count());
    for (Vertex v : t.vertices()) ds.count(v) = 1;
    const int k = static_cast<int>(t.size());
    for (std::size_t i = 0; i < g.edge_count(); ++i) {
        if (a[i] != EdgeState::Existent) continue;
        const int r = ds.unite(g.edge(i).u, g.edge(i).v);
        if (ds.count(r) == k) return true;
    }
    return false;
}

}  // namespace netrel
