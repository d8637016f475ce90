#include "netrel/s2bdd.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <climits>
#include <cstring>
#include <numeric>
#include <stdexcept>
#include <string>
#include <thread>
#include <unordered_map>

#include "netrel/errors.hpp"
#include "netrel/rng.hpp"

namespace netrel {

// ---------------------------------------------------------------------------
// Ordering

EdgeOrdering::EdgeOrdering(const UncertainGraph& g, const TerminalSet& terminals, std::vector<int> order)
    : k_(static_cast<int>(terminals.size())), order_(std::move(order)), terminal_mask_(terminals.mask(g.vertex_count())) {
    const std::size_t m = g.edge_count();
    if (order_.size() != m) throw std::invalid_argument("edge ordering must list every edge once");
    std::vector<std::uint8_t> seen(m, 0);
    for (int e : order_) {
        if (e < 0 || static_cast<std::size_t>(e) >= m || seen[e]) throw std::invalid_argument("edge ordering is not a permutation");
        seen[e] = 1;
    }

    const int n = g.vertex_count();
    first_.assign(n, INT_MAX);
    std::vector<int> last(n, -1);
    std::vector<int> remaining(n, 0);
    for (int pos = 0; pos < static_cast<int>(m); ++pos) {
        const Edge& e = g.edge(order_[pos]);
        for (Vertex x : {e.u, e.v}) {
            first_[x] = std::min(first_[x], pos);
            last[x] = std::max(last[x], pos);
            ++remaining[x];
        }
    }

    frontiers_.assign(m + 1, {});
    remaining_.assign(m + 1, {});
    plans_.resize(m);
    for (std::size_t l = 0; l < m; ++l) {
        const auto& F = frontiers_[l];
        auto& rem = remaining_[l];
        rem.resize(F.size());
        for (std::size_t i = 0; i < F.size(); ++i) rem[i] = remaining[F[i]];

        LayerPlan& plan = plans_[l];
        const Edge& e = g.edge(order_[l]);
        plan.edge = order_[l];
        plan.u = e.u;
        plan.v = e.v;
        plan.p = e.p;
        plan.work = F;
        plan.frontier_size = F.size();
        auto locate = [&](Vertex x) -> int {
            auto it = std::lower_bound(F.begin(), F.end(), x);
            if (it != F.end() && *it == x) return static_cast<int>(it - F.begin());
            for (std::size_t i = F.size(); i < plan.work.size(); ++i)
                if (plan.work[i] == x) return static_cast<int>(i);
            plan.work.push_back(x);
            return static_cast<int>(plan.work.size() - 1);
        };
        plan.u_work = locate(e.u);
        plan.v_work = locate(e.v);
        plan.work_is_terminal.resize(plan.work.size());
        for (std::size_t i = 0; i < plan.work.size(); ++i) plan.work_is_terminal[i] = terminal_mask_[plan.work[i]];

        auto& next = frontiers_[l + 1];
        for (Vertex x : plan.work)
            if (last[x] > static_cast<int>(l)) next.push_back(x);
        std::sort(next.begin(), next.end());
        plan.work_next_pos.assign(plan.work.size(), -1);
        plan.next_from_work.assign(next.size(), -1);
        for (std::size_t i = 0; i < plan.work.size(); ++i) {
            auto it = std::lower_bound(next.begin(), next.end(), plan.work[i]);
            if (it != next.end() && *it == plan.work[i]) {
                plan.work_next_pos[i] = static_cast<int>(it - next.begin());
                plan.next_from_work[it - next.begin()] = static_cast<int>(i);
            }
        }
        --remaining[e.u];
        --remaining[e.v];
    }
}

std::size_t EdgeOrdering::max_frontier_size() const {
    std::size_t best = 0;
    for (const auto& f : frontiers_) best = std::max(best, f.size());
    return best;
}

EdgeOrdering order_edges(const UncertainGraph& g, const TerminalSet& terminals) {
    const int n = g.vertex_count();
    std::vector<int> order;
    order.reserve(g.edge_count());
    std::vector<std::uint8_t> visited(n, 0), emitted(g.edge_count(), 0);
    std::vector<Vertex> queue;
    auto bfs_from = [&](Vertex start) {
        visited[start] = 1;
        queue.push_back(start);
        for (std::size_t head = queue.size() - 1; head < queue.size(); ++head) {
            const Vertex x = queue[head];
            for (int e : g.incident(x)) {
                if (emitted[e]) continue;
                emitted[e] = 1;
                order.push_back(e);
                const Vertex y = g.edge(e).u == x ? g.edge(e).v : g.edge(e).u;
                if (!visited[y]) {
                    visited[y] = 1;
                    queue.push_back(y);
                }
            }
        }
    };
    bfs_from(terminals[0]);
    // Disconnected inputs only arise inside preprocessing; cover them anyway.
    for (Vertex v = 0; v < n; ++v)
        if (!visited[v] && g.degree(v) > 0) bfs_from(v);
    return EdgeOrdering(g, terminals, std::move(order));
}

// ---------------------------------------------------------------------------
// Edge application

namespace {

struct WorkState {
    std::vector<std::uint16_t> id;  // component id per work vertex
    std::vector<int> t;             // terminal count per component id (0 for merged-away ids)
    std::vector<std::uint8_t> alive;
    std::vector<int> canon;
};

void apply_edge(const LayerPlan& plan, std::span<const std::uint16_t> comp, std::span<const std::uint16_t> term,
                EdgeState state, WorkState& w) {
    const std::size_t F = plan.frontier_size, W = plan.work.size();
    w.id.resize(W);
    int nid = 0;
    for (std::size_t i = 0; i < F; ++i) {
        w.id[i] = comp[i];
        nid = std::max(nid, comp[i] + 1);
    }
    w.t.assign(nid + (W - F), 0);
    for (std::size_t i = 0; i < F; ++i) w.t[comp[i]] = term[i];
    for (std::size_t i = F; i < W; ++i) {
        w.id[i] = static_cast<std::uint16_t>(nid++);
        w.t[w.id[i]] = plan.work_is_terminal[i];
    }
    if (state == EdgeState::Existent) {
        const auto a = w.id[plan.u_work], b = w.id[plan.v_work];
        if (a != b) {
            w.t[a] += w.t[b];
            w.t[b] = 0;
            for (auto& x : w.id)
                if (x == b) x = a;
        }
    }
}

bool work_connected(const WorkState& w, int k) {
    return std::find(w.t.begin(), w.t.end(), k) != w.t.end();
}

bool work_disconnected(const LayerPlan& plan, int k, WorkState& w) {
    w.alive.assign(w.t.size(), 0);
    for (std::size_t i = 0; i < plan.work.size(); ++i)
        if (plan.work_next_pos[i] >= 0) w.alive[w.id[i]] = 1;
    for (std::size_t c = 0; c < w.t.size(); ++c)
        if (w.t[c] > 0 && w.t[c] < k && !w.alive[c]) return true;
    return false;
}

void project(const LayerPlan& plan, WorkState& w, std::span<std::uint16_t> out_comp,
             std::span<std::uint16_t> out_term) {
    w.canon.assign(w.t.size(), -1);
    int next_id = 0;
    for (std::size_t j = 0; j < plan.next_from_work.size(); ++j) {
        const auto c = w.id[plan.next_from_work[j]];
        if (w.canon[c] < 0) w.canon[c] = next_id++;
        out_comp[j] = static_cast<std::uint16_t>(w.canon[c]);
        out_term[j] = static_cast<std::uint16_t>(w.t[c]);
    }
}

TransitionKind transit(const LayerPlan& plan, int k, std::span<const std::uint16_t> comp,
                       std::span<const std::uint16_t> term, EdgeState state, WorkState& w,
                       std::span<std::uint16_t> out_comp, std::span<std::uint16_t> out_term) {
    apply_edge(plan, comp, term, state, w);
    if (work_connected(w, k)) return TransitionKind::OneSink;
    if (work_disconnected(plan, k, w)) return TransitionKind::ZeroSink;
    project(plan, w, out_comp, out_term);
    return TransitionKind::Child;
}

void check_node_layer(const EdgeOrdering& ordering, std::size_t layer, std::size_t width) {
    if (layer >= ordering.layer_count()) throw std::out_of_range("layer beyond the last edge");
    if (width != ordering.frontier(layer).size()) throw std::invalid_argument("node does not match the layer frontier");
}

}  // namespace

template <class Real>
Transition<Real> extend(const EdgeOrdering& ordering, std::size_t layer, const S2BddNode<Real>& node, EdgeState state) {
    check_node_layer(ordering, layer, node.component.size());
    const LayerPlan& plan = ordering.plan(layer);
    Transition<Real> out;
    const Real on = from_double<Real>(plan.p);
    out.child.probability = node.probability * (state == EdgeState::Existent ? on : Real(1) - on);
    WorkState w;
    const std::size_t next = ordering.frontier(layer + 1).size();
    out.child.component.resize(next);
    out.child.terminals.resize(next);
    out.kind = transit(plan, ordering.terminal_count(), node.component, node.terminals, state, w, out.child.component,
                       out.child.terminals);
    if (out.kind != TransitionKind::Child) {
        out.child.component.clear();
        out.child.terminals.clear();
    }
    return out;
}

template <class Real>
bool check_connected(const EdgeOrdering& ordering, std::size_t layer, const S2BddNode<Real>& node, EdgeState state) {
    check_node_layer(ordering, layer, node.component.size());
    WorkState w;
    apply_edge(ordering.plan(layer), node.component, node.terminals, state, w);
    return work_connected(w, ordering.terminal_count());
}

template <class Real>
bool check_disconnected(const EdgeOrdering& ordering, std::size_t layer, const S2BddNode<Real>& node,
                        EdgeState state) {
    check_node_layer(ordering, layer, node.component.size());
    WorkState w;
    const LayerPlan& plan = ordering.plan(layer);
    apply_edge(plan, node.component, node.terminals, state, w);
    return work_disconnected(plan, ordering.terminal_count(), w);
}

template <class Real>
MergeKey merge_key(const S2BddNode<Real>& node) {
    MergeKey key;
    key.component = node.component;
    key.positive.resize(node.terminals.size());
    for (std::size_t i = 0; i < node.terminals.size(); ++i) key.positive[i] = node.terminals[i] > 0;
    return key;
}

template <class Real>
std::vector<S2BddNode<Real>> merge_layer(std::vector<S2BddNode<Real>> nodes) {
    std::vector<S2BddNode<Real>> out;
    std::vector<MergeKey> keys;
    for (auto& n : nodes) {
        MergeKey key = merge_key(n);
        auto it = std::find(keys.begin(), keys.end(), key);
        if (it != keys.end()) {
            out[it - keys.begin()].probability += n.probability;
        } else {
            keys.push_back(std::move(key));
            out.push_back(std::move(n));
        }
    }
    return out;
}

std::vector<int> component_uncertain_degree(const EdgeOrdering& ordering, std::size_t layer,
                                            std::span<const std::uint16_t> component) {
    const auto rem = ordering.remaining_degree(layer);
    std::vector<int> per_comp(component.size() + 1, 0);
    for (std::size_t i = 0; i < component.size(); ++i) per_comp[component[i]] += rem[i];
    std::vector<int> d(component.size());
    for (std::size_t i = 0; i < component.size(); ++i) d[i] = per_comp[component[i]];
    return d;
}

namespace {

double priority_factor(std::span<const int> rem, std::span<const std::uint16_t> comp,
                       std::span<const std::uint16_t> term, int k, std::vector<int>& scratch) {
    scratch.assign(comp.size() + 1, 0);
    for (std::size_t i = 0; i < comp.size(); ++i) scratch[comp[i]] += rem[i];
    double best = 0.0;
    for (std::size_t i = 0; i < comp.size(); ++i) {
        if (term[i] == 0) continue;
        const int d = scratch[comp[i]];
        const double v = std::max(static_cast<double>(term[i]) / k, d > 0 ? 1.0 / d : 1.0);
        best = std::max(best, v);
    }
    return best;
}

}  // namespace

template <class Real>
double node_priority(const EdgeOrdering& ordering, std::size_t layer, const S2BddNode<Real>& node) {
    if (node.component.size() != ordering.frontier(layer).size())
        throw std::invalid_argument("node does not match the layer frontier");
    std::vector<int> scratch;
    return to_double(node.probability) *
           priority_factor(ordering.remaining_degree(layer), node.component, node.terminals,
                           ordering.terminal_count(), scratch);
}

// ---------------------------------------------------------------------------
// Completion sampling

namespace {

/// Draws the undecided edges of a node and tests terminal connectivity. The
/// node's frontier components seed a union-find; closed components carry no
/// terminals and untouched vertices join lazily.
class CompletionSampler {
public:
    CompletionSampler(const UncertainGraph& g, const EdgeOrdering& ordering)
        : g_(g), ord_(ordering), parent_(g.vertex_count()), count_(g.vertex_count()), stamp_(g.vertex_count(), 0) {}

    /// With `full`, every remaining edge is drawn and its outcome recorded in
    /// `bits` with the completion's probability in `prob`.
    bool draw(std::size_t layer, std::span<const std::uint16_t> comp, std::span<const std::uint16_t> term,
              CounterRng& rng, bool full, double* prob, std::vector<std::uint64_t>* bits) {
        ++epoch_;
        const auto F = ord_.frontier(layer);
        reps_.assign(F.size() + 1, -1);
        for (std::size_t i = 0; i < F.size(); ++i) {
            const Vertex x = F[i];
            stamp_[x] = epoch_;
            auto& r = reps_[comp[i]];
            if (r < 0) {
                r = x;
                parent_[x] = x;
                count_[x] = term[i];
            } else {
                parent_[x] = r;
                count_[x] = 0;
            }
        }
        const int k = ord_.terminal_count();
        const auto order = ord_.order();
        const std::size_t m = order.size();
        if (full) {
            bits->assign((m - layer + 63) / 64, 0);
            *prob = 1.0;
        }
        bool connected = false;
        for (std::size_t pos = layer; pos < m; ++pos) {
            const Edge& e = g_.edge(order[pos]);
            const bool on = rng.uniform() < e.p;
            if (full) {
                *prob *= on ? e.p : 1.0 - e.p;
                if (on) (*bits)[(pos - layer) >> 6] |= std::uint64_t{1} << ((pos - layer) & 63);
            }
            if (!on || connected) continue;
            int a = find(touch(e.u)), b = find(touch(e.v));
            if (a == b) continue;
            parent_[b] = a;
            count_[a] += count_[b];
            if (count_[a] == k) {
                connected = true;
                if (!full) return true;
            }
        }
        return connected;
    }

private:
    int touch(Vertex x) {
        if (stamp_[x] != epoch_) {
            stamp_[x] = epoch_;
            parent_[x] = x;
            count_[x] = ord_.terminal_mask()[x];
        }
        return x;
    }
    int find(int x) {
        while (parent_[x] != x) {
            parent_[x] = parent_[parent_[x]];
            x = parent_[x];
        }
        return x;
    }

    const UncertainGraph& g_;
    const EdgeOrdering& ord_;
    std::vector<int> parent_, count_;
    std::vector<std::uint32_t> stamp_;
    std::uint32_t epoch_ = 0;
    std::vector<int> reps_;
};

struct StoredNode {
    std::size_t layer = 0;
    double probability = 0.0;
    std::vector<std::uint16_t> component, terminals;
};

/// Undecided mass set aside at one layer (deleted nodes) or at a budget exit
/// (surviving nodes). Nodes heavy enough to own a stratum under the largest
/// allocation this pool can still receive are kept whole; the rest are
/// represented by draws selected in proportion to probability.
struct Pool {
    std::size_t trace_row = 0;
    double mass = 0.0;
    std::int64_t capacity = 0;  // upper bound on the draws the pool can receive
    std::vector<StoredNode> heavy;
    double light_mass = 0.0;
    std::vector<StoredNode> light;       // distinct selected light nodes
    std::vector<std::uint32_t> light_seq;  // selection sequence into `light`
};

std::int64_t allocation(std::int64_t s_reduced, double mass) {
    if (s_reduced <= 0 || !(mass > 0.0)) return 0;
    const auto a = static_cast<std::int64_t>(std::floor(static_cast<double>(s_reduced) * mass + 1e-9));
    return std::max<std::int64_t>(1, a);
}

struct Task {
    const Pool* pool = nullptr;
    int heavy_index = -1;  // >= 0: a heavy node's main part; -1: the pool's residual stratum
    std::int64_t draws = 0;
    double mass = 0.0;
    std::uint64_t stream = 0;
    // Residual stratum units: heavy remainders then the light group.
    std::vector<double> weights;  // cumulative
    double light_weight = 0.0;    // total residual weight carried by light nodes
    std::int64_t a = 0;           // pool allocation, for light-unit weights
    // outputs
    std::int64_t successes = 0;
    std::vector<HtOutcome> outcomes;
};

void run_task(Task& task, CompletionSampler& sampler, std::uint64_t seed, bool ht) {
    CounterRng rng(seed, task.stream);
    const Pool& pool = *task.pool;
    std::unordered_map<std::string, std::size_t> seen;
    std::vector<std::uint64_t> bits;
    std::string key;
    std::size_t light_cursor = 0;
    const double total_weight = task.weights.empty() ? 0.0 : task.weights.back();
    for (std::int64_t i = 0; i < task.draws; ++i) {
        const StoredNode* node;
        std::uint32_t unit;
        double unit_share = 1.0;
        if (task.heavy_index >= 0) {
            node = &pool.heavy[task.heavy_index];
            unit = static_cast<std::uint32_t>(task.heavy_index);
        } else {
            const double u = rng.uniform() * total_weight;
            const auto it = std::upper_bound(task.weights.begin(), task.weights.end(), u);
            const auto idx = static_cast<std::size_t>(std::min<std::ptrdiff_t>(it - task.weights.begin(),
                                                                               task.weights.size() - 1));
            if (idx < pool.heavy.size()) {
                node = &pool.heavy[idx];
                unit = static_cast<std::uint32_t>(idx);
                const double prev = idx == 0 ? 0.0 : task.weights[idx - 1];
                unit_share = (task.weights[idx] - prev) / total_weight;
            } else {
                if (light_cursor >= pool.light_seq.size()) throw std::logic_error("light selections exhausted");
                const auto li = pool.light_seq[light_cursor++];
                node = &pool.light[li];
                unit = static_cast<std::uint32_t>(pool.heavy.size() + li);
                unit_share = static_cast<double>(task.a) * node->probability / pool.mass / total_weight;
            }
        }
        double prob = 1.0;
        const bool ok = sampler.draw(node->layer, node->component, node->terminals, rng, ht, &prob, &bits);
        if (ok) ++task.successes;
        if (ht) {
            key.assign(reinterpret_cast<const char*>(&unit), sizeof unit);
            key.append(reinterpret_cast<const char*>(bits.data()), bits.size() * sizeof(std::uint64_t));
            if (seen.emplace(key, task.outcomes.size()).second) task.outcomes.push_back({unit_share * prob, ok});
        }
    }
}

void run_tasks(std::vector<Task>& tasks, const UncertainGraph& g, const EdgeOrdering& ordering,
               std::uint64_t seed, bool ht, unsigned threads) {
    threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(tasks.size())));
    if (threads <= 1) {
        CompletionSampler sampler(g, ordering);
        for (auto& t : tasks) run_task(t, sampler, seed, ht);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (unsigned i = 0; i < threads; ++i)
        pool.emplace_back([&] {
            CompletionSampler sampler(g, ordering);
            for (std::size_t j; (j = next.fetch_add(1)) < tasks.size();) run_task(tasks[j], sampler, seed, ht);
        });
    for (auto& th : pool) th.join();
}

/// Flat storage for one layer's nodes.
template <class Real>
struct Layer {
    std::size_t width = 0;
    std::vector<std::uint16_t> comp, term;
    std::vector<Real> prob;

    std::size_t size() const { return prob.size(); }
    std::span<const std::uint16_t> comp_of(std::size_t i) const { return {comp.data() + i * width, width}; }
    std::span<const std::uint16_t> term_of(std::size_t i) const { return {term.data() + i * width, width}; }
    void reset(std::size_t w) {
        width = w;
        comp.clear();
        term.clear();
        prob.clear();
    }
};

/// Open-addressing index over a layer's MergeKeys; equality is always
/// confirmed against the stored key.
class MergeTable {
public:
    void reset(std::size_t expected) {
        std::size_t cap = 16;
        while (cap < expected * 2) cap <<= 1;
        slots_.assign(cap, kEmpty);
        used_ = 0;
    }

    template <class Eq>
    std::uint32_t find_or_insert(std::uint64_t hash, std::uint32_t candidate, Eq&& equal_to_existing) {
        if ((used_ + 1) * 2 > slots_.size()) grow_needed_ = true;
        std::size_t mask = slots_.size() - 1;
        for (std::size_t i = hash & mask;; i = (i + 1) & mask) {
            if (slots_[i].index == kEmpty.index) {
                slots_[i] = {candidate, hash};
                ++used_;
                return candidate;
            }
            if (slots_[i].hash == hash && equal_to_existing(slots_[i].index)) return slots_[i].index;
        }
    }

    bool needs_grow() const { return grow_needed_; }

    void grow() {
        std::vector<Slot> old = std::move(slots_);
        slots_.assign(old.size() * 2, kEmpty);
        grow_needed_ = false;
        const std::size_t mask = slots_.size() - 1;
        for (const Slot& s : old) {
            if (s.index == kEmpty.index) continue;
            std::size_t i = s.hash & mask;
            while (slots_[i].index != kEmpty.index) i = (i + 1) & mask;
            slots_[i] = s;
        }
    }

private:
    struct Slot {
        std::uint32_t index;
        std::uint64_t hash;
    };
    static constexpr Slot kEmpty{0xffffffffu, 0};
    std::vector<Slot> slots_;
    std::size_t used_ = 0;
    bool grow_needed_ = false;
};

std::uint64_t key_hash(std::span<const std::uint16_t> comp, std::span<const std::uint16_t> term) {
    std::uint64_t h = 0x84222325cbf29ce4ULL;
    for (std::size_t i = 0; i < comp.size(); ++i) {
        h ^= comp[i] | (term[i] > 0 ? 0x10000u : 0u);
        h *= 0x100000001b3ULL;
    }
    return mix64(h);
}

bool key_equal(std::span<const std::uint16_t> ca, std::span<const std::uint16_t> ta,
               std::span<const std::uint16_t> cb, std::span<const std::uint16_t> tb) {
    if (!std::equal(ca.begin(), ca.end(), cb.begin())) return false;
    for (std::size_t i = 0; i < ta.size(); ++i)
        if ((ta[i] > 0) != (tb[i] > 0)) return false;
    return true;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

template <class Real>
ConstructionResult<Real> construct(const UncertainGraph& g, const TerminalSet& terminals,
                                   const ConstructionConfig& config) {
    return construct<Real>(g, terminals, order_edges(g, terminals), config);
}

template <class Real>
ConstructionResult<Real> construct(const UncertainGraph& g, const TerminalSet& terminals,
                                   const EdgeOrdering& ordering, const ConstructionConfig& config) {
    if (config.max_width < 1) throw std::invalid_argument("max width must be at least 1");
    if (config.samples < 0) throw std::invalid_argument("sample count must be nonnegative");
    (void)terminals;
    const auto t_start = std::chrono::steady_clock::now();
    const int k = ordering.terminal_count();
    const std::size_t m = ordering.layer_count();
    const bool ht = config.estimator == EstimatorKind::HorvitzThompson;

    ConstructionResult<Real> result;
    Accumulator<Real> p_c, p_d;
    std::int64_t s_reduced = config.samples;
    std::vector<Pool> pools;

    Layer<Real> layer, next;
    layer.reset(0);
    layer.prob.push_back(Real(1));
    WorkState w;
    MergeTable table;
    std::vector<std::uint16_t> child_comp, child_term;
    std::vector<double> priority;
    std::vector<std::uint32_t> rank;
    std::vector<int> scratch;
    KahanSum deleted_total;

    auto current_bounds = [&] { return Bounds{to_double(p_c.value()), to_double(p_d.value())}; };

    auto make_pool = [&](const Layer<Real>& src, std::span<const std::uint32_t> members, std::size_t node_layer,
                         std::int64_t capacity, std::uint64_t pool_index) {
        Pool pool;
        pool.trace_row = result.trace.empty() ? 0 : result.trace.size() - 1;
        KahanSum mass;
        std::vector<double> probs(members.size());
        for (std::size_t i = 0; i < members.size(); ++i) {
            probs[i] = to_double(src.prob[members[i]]);
            mass += probs[i];
        }
        pool.mass = mass.value();
        pool.capacity = capacity;
        if (capacity <= 0) return pool;
        const double threshold = pool.mass / static_cast<double>(capacity);
        std::vector<std::uint32_t> light_members;
        std::vector<double> light_cum;
        KahanSum light_mass;
        auto store = [&](std::uint32_t idx, double pr) {
            StoredNode n;
            n.layer = node_layer;
            n.probability = pr;
            auto c = src.comp_of(idx);
            auto t = src.term_of(idx);
            n.component.assign(c.begin(), c.end());
            n.terminals.assign(t.begin(), t.end());
            return n;
        };
        for (std::size_t i = 0; i < members.size(); ++i) {
            if (probs[i] >= threshold) {
                pool.heavy.push_back(store(members[i], probs[i]));
            } else {
                light_mass += probs[i];
                light_members.push_back(static_cast<std::uint32_t>(i));
                light_cum.push_back(light_mass.value());
            }
        }
        pool.light_mass = light_mass.value();
        if (light_members.empty() || !(pool.light_mass > 0.0)) return pool;
        CounterRng rng(config.seed, stream_id({config.stream, pool_index, 0x5e1ec7}));
        std::unordered_map<std::uint32_t, std::uint32_t> stored;
        for (std::int64_t j = 0; j < capacity; ++j) {
            const double u = rng.uniform() * light_cum.back();
            auto it = std::upper_bound(light_cum.begin(), light_cum.end(), u);
            const auto pick = static_cast<std::size_t>(std::min<std::ptrdiff_t>(it - light_cum.begin(),
                                                                                light_cum.size() - 1));
            const auto member = light_members[pick];
            auto [slot, inserted] = stored.emplace(member, static_cast<std::uint32_t>(pool.light.size()));
            if (inserted) pool.light.push_back(store(members[member], probs[member]));
            pool.light_seq.push_back(slot->second);
        }
        return pool;
    };

    for (std::size_t l = 0; l < m; ++l) {
        const LayerPlan& plan = ordering.plan(l);
        const std::size_t next_width = ordering.frontier(l + 1).size();
        const Real on = from_double<Real>(g.edge(plan.edge).p);
        const Real off = Real(1) - on;
        next.reset(next_width);
        table.reset(std::min<std::size_t>(2 * layer.size(), config.hard_cap == SIZE_MAX ? 1u << 22 : config.hard_cap) + 8);
        child_comp.resize(next_width);
        child_term.resize(next_width);

        for (std::size_t i = 0; i < layer.size(); ++i) {
            for (EdgeState st : {EdgeState::NonExistent, EdgeState::Existent}) {
                const Real pr = layer.prob[i] * (st == EdgeState::Existent ? on : off);
                if (pr == 0) continue;
                const auto kind = transit(plan, k, layer.comp_of(i), layer.term_of(i), st, w, child_comp, child_term);
                if (kind == TransitionKind::OneSink) {
                    p_c += pr;
                    continue;
                }
                if (kind == TransitionKind::ZeroSink) {
                    p_d += pr;
                    continue;
                }
                const auto candidate = static_cast<std::uint32_t>(next.size());
                std::uint32_t found = candidate;
                if (config.merge) {
                    if (table.needs_grow()) table.grow();
                    found = table.find_or_insert(key_hash(child_comp, child_term), candidate, [&](std::uint32_t j) {
                        return key_equal(next.comp_of(j), next.term_of(j), child_comp, child_term);
                    });
                }
                if (found == candidate) {
                    next.comp.insert(next.comp.end(), child_comp.begin(), child_comp.end());
                    next.term.insert(next.term.end(), child_term.begin(), child_term.end());
                    next.prob.push_back(pr);
                    if (next.size() > config.hard_cap)
                        throw CapExceeded("diagram layer width exceeds cap " + std::to_string(config.hard_cap));
                } else {
                    next.prob[found] += pr;
                }
            }
        }
        result.peak_width = std::max(result.peak_width, next.size());

        // Deleting: keep the w highest-priority nodes.
        double deleted_mass = 0.0;
        if (next.size() > config.max_width) {
            const auto rem = ordering.remaining_degree(l + 1);
            priority.resize(next.size());
            for (std::size_t i = 0; i < next.size(); ++i)
                priority[i] = to_double(next.prob[i]) * priority_factor(rem, next.comp_of(i), next.term_of(i), k, scratch);
            rank.resize(next.size());
            std::iota(rank.begin(), rank.end(), 0u);
            std::stable_sort(rank.begin(), rank.end(), [&](auto a, auto b) { return priority[a] > priority[b]; });

            result.trace.push_back({l + 1, 0, 0, 0, 0, 0, 0});
            const std::span<const std::uint32_t> dropped(rank.data() + config.max_width, rank.size() - config.max_width);
            Pool pool = make_pool(next, dropped, l + 1, 0, pools.size());
            // Capacity depends on the pool mass; rebuild with it.
            const std::int64_t cap = allocation(s_reduced, pool.mass);
            pool = make_pool(next, dropped, l + 1, cap, pools.size());
            deleted_mass = pool.mass;
            deleted_total += deleted_mass;
            result.deleted_nodes += dropped.size();
            pools.push_back(std::move(pool));

            Layer<Real> kept;
            kept.reset(next_width);
            for (std::size_t r = 0; r < config.max_width; ++r) {
                const auto i = rank[r];
                kept.comp.insert(kept.comp.end(), next.comp_of(i).begin(), next.comp_of(i).end());
                kept.term.insert(kept.term.end(), next.term_of(i).begin(), next.term_of(i).end());
                kept.prob.push_back(next.prob[i]);
            }
            std::swap(next, kept);
        } else {
            result.trace.push_back({l + 1, 0, 0, 0, 0, 0, 0});
        }

        std::swap(layer, next);
        const Bounds b = current_bounds();
        s_reduced = std::min(s_reduced, reduced_sample_count(config.samples, b));

        Accumulator<Real> surviving;
        for (const auto& pr : layer.prob) surviving += pr;
        auto& row = result.trace.back();
        row.width = layer.size();
        row.p_c = b.p_c;
        row.p_d = b.p_d;
        row.deleted_mass = deleted_mass;
        row.surviving_mass = to_double(surviving.value());

        if (layer.size() == 0) break;

        if (config.budget_exit) {
            std::int64_t committed = 0;
            for (const auto& p : pools) committed += allocation(s_reduced, p.mass);
            if (committed >= s_reduced) {
                std::vector<std::uint32_t> all(layer.size());
                std::iota(all.begin(), all.end(), 0u);
                const double mass = row.surviving_mass;
                pools.push_back(make_pool(layer, all, l + 1, allocation(s_reduced, mass), pools.size()));
                layer.prob.clear();
                break;
            }
        }
    }
    if (layer.size() != 0 && m > 0) throw std::logic_error("construction ended with undecided nodes");

    result.p_c = p_c.value();
    result.p_d = p_d.value();
    EstimateReport& rep = result.report;
    rep.bounds = current_bounds();
    rep.estimator = config.estimator;
    rep.budget = {config.samples, s_reduced};
    rep.timings.construct_seconds = seconds_since(t_start);

    // Sampling: every pool becomes heavy-node strata plus a residual stratum
    // under its final allocation.
    const auto t_sample = std::chrono::steady_clock::now();
    std::vector<Task> tasks;
    bool starved = false;
    for (std::size_t pi = 0; pi < pools.size(); ++pi) {
        const Pool& pool = pools[pi];
        const std::int64_t a = std::min(allocation(s_reduced, pool.mass), pool.capacity);
        if (pool.mass > 0.0 && a == 0) starved = true;
        if (a == 0) continue;
        result.trace[pool.trace_row].samples_drawn += a;
        const double unit_mass = pool.mass / static_cast<double>(a);
        std::int64_t assigned = 0;
        Task residual;
        residual.pool = &pool;
        residual.a = a;
        double cum = 0.0;
        for (std::size_t h = 0; h < pool.heavy.size(); ++h) {
            const double share = static_cast<double>(a) * pool.heavy[h].probability / pool.mass;
            const auto n = static_cast<std::int64_t>(std::floor(share));
            if (n > 0) {
                Task t;
                t.pool = &pool;
                t.heavy_index = static_cast<int>(h);
                t.draws = n;
                t.mass = unit_mass * static_cast<double>(n);
                t.stream = stream_id({config.stream, pi, h});
                tasks.push_back(std::move(t));
                assigned += n;
            }
            cum += share - static_cast<double>(n);
            residual.weights.push_back(cum);
        }
        residual.light_weight = static_cast<double>(a) * pool.light_mass / pool.mass;
        residual.weights.push_back(cum + residual.light_weight);
        residual.draws = a - assigned;
        if (residual.draws > 0) {
            residual.mass = unit_mass * static_cast<double>(residual.draws);
            residual.stream = stream_id({config.stream, pi, 0xffffffffULL});
            tasks.push_back(std::move(residual));
        }
    }
    run_tasks(tasks, g, ordering, config.seed, ht, config.threads);

    std::int64_t drawn = 0;
    for (const auto& t : tasks) drawn += t.draws;
    rep.samples_drawn = drawn;
    result.strata = tasks.size();

    const double undecided = std::max(0.0, 1.0 - rep.bounds.p_c - rep.bounds.p_d);
    rep.exact = pools.empty() && undecided <= 1e-9;
    if (starved) {
        rep.estimate = 0.5 * (rep.bounds.lower() + rep.bounds.upper());
        rep.variance_estimate = 0.0;
    } else if (!ht) {
        std::vector<StratumDraw> strata;
        for (const auto& t : tasks) strata.push_back({t.mass, t.draws, t.successes});
        rep.estimate = mc_estimate(strata, rep.bounds);
        rep.variance_estimate = s_reduced > 0 ? stratified_mc_variance(rep.estimate, rep.bounds, s_reduced) : 0.0;
    } else {
        std::vector<HtStratum> strata;
        std::vector<HtOutcome> unconditional;
        for (auto& t : tasks) {
            for (const auto& o : t.outcomes) unconditional.push_back({o.probability * t.mass, o.connected});
            strata.push_back({t.mass, t.draws, std::move(t.outcomes)});
        }
        rep.estimate = ht_estimate(strata, rep.bounds);
        rep.variance_estimate = s_reduced > 0 ? ht_variance(rep.estimate, rep.bounds, s_reduced, unconditional) : 0.0;
    }
    if (rep.exact) rep.estimate = rep.bounds.p_c;
    rep.timings.sample_seconds = seconds_since(t_sample);
    return result;
}

template <class Real>
Real exact_mode(const UncertainGraph& g, const TerminalSet& terminals, std::size_t width_cap) {
    ConstructionConfig cfg;
    cfg.max_width = std::numeric_limits<std::size_t>::max();
    cfg.hard_cap = width_cap;
    cfg.samples = 0;
    cfg.budget_exit = false;
    auto res = construct<Real>(g, terminals, cfg);
    return res.p_c;
}

EstimateReport plain_sampling(const UncertainGraph& g, const TerminalSet& terminals, std::int64_t s,
                              EstimatorKind estimator, std::uint64_t seed, std::uint64_t stream) {
    if (s < 1) throw std::invalid_argument("plain sampling needs at least one sample");
    const auto t0 = std::chrono::steady_clock::now();
    std::vector<int> identity(g.edge_count());
    std::iota(identity.begin(), identity.end(), 0);
    const EdgeOrdering ordering(g, terminals, std::move(identity));
    Pool pool;
    pool.mass = 1.0;
    pool.heavy.push_back(StoredNode{0, 1.0, {}, {}});
    Task task;
    task.pool = &pool;
    task.heavy_index = 0;
    task.draws = s;
    task.mass = 1.0;
    task.stream = stream_id({stream, 0xba5e});
    const bool ht = estimator == EstimatorKind::HorvitzThompson;
    CompletionSampler sampler(g, ordering);
    run_task(task, sampler, seed, ht);

    EstimateReport rep;
    rep.estimator = estimator;
    rep.budget = {s, s};
    rep.samples_drawn = s;
    if (!ht) {
        const StratumDraw st{1.0, s, task.successes};
        rep.estimate = mc_estimate(std::span(&st, 1), rep.bounds);
        rep.variance_estimate = mc_variance(rep.estimate, s);
    } else {
        const HtStratum st{1.0, s, task.outcomes};
        rep.estimate = ht_estimate(std::span(&st, 1), rep.bounds);
        rep.variance_estimate = ht_variance(rep.estimate, rep.bounds, s, task.outcomes);
    }
    rep.timings.sample_seconds = seconds_since(t0);
    return rep;
}

#define NETREL_INSTANTIATE(R)                                                                                     \
    template Transition<R> extend<R>(const EdgeOrdering&, std::size_t, const S2BddNode<R>&, EdgeState);           \
    template bool check_connected<R>(const EdgeOrdering&, std::size_t, const S2BddNode<R>&, EdgeState);           \
    template bool check_disconnected<R>(const EdgeOrdering&, std::size_t, const S2BddNode<R>&, EdgeState);        \
    template MergeKey merge_key<R>(const S2BddNode<R>&);                                                          \
    template std::vector<S2BddNode<R>> merge_layer<R>(std::vector<S2BddNode<R>>);                                 \
    template double node_priority<R>(const EdgeOrdering&, std::size_t, const S2BddNode<R>&);                      \
    template ConstructionResult<R> construct<R>(const UncertainGraph&, const TerminalSet&,                        \
                                                const ConstructionConfig&);                                       \
    template ConstructionResult<R> construct<R>(const UncertainGraph&, const TerminalSet&, const EdgeOrdering&,   \
                                                const ConstructionConfig&);                                       \
    template R exact_mode<R>(const UncertainGraph&, const TerminalSet&, std::size_t);

NETREL_INSTANTIATE(double)
NETREL_INSTANTIATE(Rational)

}  // namespace netrel
