#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "netrel/estimators.hpp"
#include "netrel/graph.hpp"

namespace netrel {

/// Frontier bookkeeping for processing one edge. Layer l holds the nodes whose
/// intermediate graphs decide edges order[0..l-1]; processing order[l] yields
/// layer l+1.
struct LayerPlan {
    int edge = 0;  // index into the graph's edge list
    Vertex u = 0, v = 0;
    double p = 1.0;
    /// Frontier F_l followed by endpoints entering the frontier at this edge.
    std::vector<Vertex> work;
    std::size_t frontier_size = 0;  // |F_l|; work[0..frontier_size) == F_l
    std::vector<std::uint8_t> work_is_terminal;
    std::vector<int> work_next_pos;  // position in F_{l+1}, or -1 when the vertex leaves
    std::vector<int> next_from_work; // for each position of F_{l+1}, its index in `work`
    int u_work = 0, v_work = 0;
};

/// Edge permutation plus the per-layer frontiers derived from it.
class EdgeOrdering {
public:
    EdgeOrdering(const UncertainGraph& g, const TerminalSet& terminals, std::vector<int> order);

    std::size_t layer_count() const { return order_.size(); }
    std::span<const int> order() const { return order_; }
    const LayerPlan& plan(std::size_t l) const { return plans_[l]; }
    /// F_l for l in [0, |E|]; sorted vertex ids.
    std::span<const Vertex> frontier(std::size_t l) const { return frontiers_[l]; }
    /// Undecided edges incident to each vertex of F_l.
    std::span<const int> remaining_degree(std::size_t l) const { return remaining_[l]; }
    std::size_t max_frontier_size() const;

    int terminal_count() const { return k_; }
    std::span<const std::uint8_t> terminal_mask() const { return terminal_mask_; }
    /// Position of the first edge touching v.
    int first_touch(Vertex v) const { return first_[v]; }

private:
    int k_ = 0;
    std::vector<int> order_;
    std::vector<LayerPlan> plans_;
    std::vector<std::vector<Vertex>> frontiers_;
    std::vector<std::vector<int>> remaining_;
    std::vector<std::uint8_t> terminal_mask_;
    std::vector<int> first_;
};

/// Breadth-first from the smallest terminal, emitting each vertex's
/// incident edges the first time it is dequeued.
EdgeOrdering order_edges(const UncertainGraph& g, const TerminalSet& terminals);

/// Diagram node: probability of its intermediate graphs, and per frontier
/// vertex the canonical component id and the terminal count of that
/// component (mirrored on all members). The uncertain-edge count d of a
/// component is derived from the ordering (see component_uncertain_degree).
template <class Real>
struct S2BddNode {
    Real probability = 1;
    std::vector<std::uint16_t> component;
    std::vector<std::uint16_t> terminals;
};

template <class Real>
S2BddNode<Real> root_node() { return {}; }

enum class TransitionKind { Child, OneSink, ZeroSink };

template <class Real>
struct Transition {
    TransitionKind kind = TransitionKind::Child;
    S2BddNode<Real> child;  // meaningful for Child; probability is set for all kinds
};

/// Decides order[l] for a node of layer l.
template <class Real>
Transition<Real> extend(const EdgeOrdering& ordering, std::size_t layer, const S2BddNode<Real>& node, EdgeState state);

/// True when, after setting the edge, some component holds all k terminals.
/// This covers the three connection conditions: a frontier reaching t = k, a
/// departing terminal endpoint carrying the k-th terminal into a component
/// with k - 1, and an edge joining two components whose counts sum to k.
template <class Real>
bool check_connected(const EdgeOrdering& ordering, std::size_t layer, const S2BddNode<Real>& node, EdgeState state);

/// True when, after setting the edge, a component with 0 < t < k has no
/// member left on the next frontier: it can never gain an edge again. Covers
/// an isolated terminal whose only edge is absent, a terminal component whose
/// last uncertain edge (d = 1) is absent, and both endpoints leaving while
/// attached to terminals with nothing else undecided in their component.
template <class Real>
bool check_disconnected(const EdgeOrdering& ordering, std::size_t layer, const S2BddNode<Real>& node,
                        EdgeState state);

/// Canonical component ids with the zero/positive pattern of t; nodes with
/// equal keys reach the same sinks under every completion.
struct MergeKey {
    std::vector<std::uint16_t> component;
    std::vector<std::uint8_t> positive;
    bool operator==(const MergeKey&) const = default;
};

template <class Real>
MergeKey merge_key(const S2BddNode<Real>& node);

/// Collapses nodes with equal MergeKey (first occurrence kept, probabilities
/// summed). Order of first occurrences is preserved.
template <class Real>
std::vector<S2BddNode<Real>> merge_layer(std::vector<S2BddNode<Real>> nodes);

/// Sum of undecided-edge counts over the frontier members of each position's
/// component, for a node of layer l.
std::vector<int> component_uncertain_degree(const EdgeOrdering& ordering, std::size_t layer,
                                            std::span<const std::uint16_t> component);

/// h(n) = p_n * max over frontiers with t > 0 of max(t/k, 1/d); 0 when no
/// frontier touches a terminal.
template <class Real>
double node_priority(const EdgeOrdering& ordering, std::size_t layer, const S2BddNode<Real>& node);

struct ConstructionConfig {
    std::size_t max_width = 10000;  // w, per layer
    std::int64_t samples = 10000;   // s
    EstimatorKind estimator = EstimatorKind::MonteCarlo;
    std::uint64_t seed = 0;
    std::uint64_t stream = 0;  // distinguishes independent constructions under one seed
    bool merge = true;
    bool budget_exit = true;
    /// Hard limit on the undeleted layer width; exceeding it throws CapExceeded.
    std::size_t hard_cap = std::numeric_limits<std::size_t>::max();
    unsigned threads = 1;
};

struct LayerTrace {
    std::size_t layer = 0;
    std::size_t width = 0;
    double p_c = 0.0;
    double p_d = 0.0;
    double deleted_mass = 0.0;
    double surviving_mass = 0.0;
    std::int64_t samples_drawn = 0;
};

struct PhaseTimings {
    double preprocess_seconds = 0.0;
    double construct_seconds = 0.0;
    double sample_seconds = 0.0;
};

struct EstimateReport {
    double estimate = 0.0;
    Bounds bounds;
    SampleBudget budget;
    std::int64_t samples_drawn = 0;
    double variance_estimate = 0.0;
    EstimatorKind estimator = EstimatorKind::MonteCarlo;
    /// Bounds closed (p_c + p_d = 1) without sampling.
    bool exact = false;
    PhaseTimings timings;
};

template <class Real>
struct ConstructionResult {
    EstimateReport report;
    Real p_c = 0;
    Real p_d = 0;
    std::vector<LayerTrace> trace;  // one row per processed layer
    std::size_t deleted_nodes = 0;
    std::size_t peak_width = 0;
    std::size_t strata = 0;
};

/// Builds the width-bounded diagram layer by layer, accumulating sink masses,
/// deleting the lowest-priority nodes beyond w and sampling completions of the
/// deleted (and, on budget exit, surviving) nodes as strata.
template <class Real = double>
ConstructionResult<Real> construct(const UncertainGraph& g, const TerminalSet& terminals,
                                   const ConstructionConfig& config);

template <class Real = double>
ConstructionResult<Real> construct(const UncertainGraph& g, const TerminalSet& terminals,
                                   const EdgeOrdering& ordering, const ConstructionConfig& config);

/// Unbounded-width construction; returns p_c, which equals the reliability.
/// Throws CapExceeded when a layer exceeds `width_cap` nodes.
template <class Real = double>
Real exact_mode(const UncertainGraph& g, const TerminalSet& terminals, std::size_t width_cap = 4'000'000);

/// Plain sampling baseline: s possible graphs of the whole graph, estimated
/// by the mean indicator (MC) or Horvitz-Thompson over distinct draws.
EstimateReport plain_sampling(const UncertainGraph& g, const TerminalSet& terminals, std::int64_t s,
                              EstimatorKind estimator, std::uint64_t seed, std::uint64_t stream = 0);

}  // namespace netrel
