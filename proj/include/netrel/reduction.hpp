#pragma once

#include <vector>

#include "netrel/graph.hpp"

namespace netrel {

/// Bridges, their endpoints (the cut vertices of the bridge tree) and the
/// 2-edge-connected component of every vertex.
struct StructureIndex {
    std::vector<int> bridges;  // edge ids, ascending
    std::vector<Vertex> articulation_points;
    std::vector<int> component_of;
    int component_count = 0;
};

StructureIndex build_structure_index(const UncertainGraph& g);

/// A reduced graph with compact vertex ids; `original[v]` is the id of v in
/// the input graph.
struct Subgraph {
    UncertainGraph graph;
    TerminalSet terminals;
    std::vector<Vertex> original;
};

Subgraph identity_subgraph(const UncertainGraph& g, const TerminalSet& terminals);

/// Keeps the minimal subtree of the bridge tree spanning the terminals.
/// Throws DataError when the terminals are not in one connected component.
Subgraph prune(const Subgraph& in);

/// Splits along bridges. Every bridge of a pruned graph separates terminals,
/// so R = product of bridge probabilities times the reliabilities of the
/// 2-edge-connected parts, each queried on its terminals plus bridge
/// endpoints. Parts left with fewer than two terminals have reliability 1 and
/// are dropped. Throws std::invalid_argument on a bridge with no terminal on
/// one side (prune first).
struct Decomposition {
    double bridge_product = 1.0;
    std::vector<Subgraph> parts;
};

Decomposition decompose(const Subgraph& in);

struct TransformStats {
    int loops = 0;
    int parallel = 0;
    int series = 0;
};

/// Deletes loops, merges parallel edges (1 - (1-p)(1-q)) and contracts
/// non-terminal degree-2 vertices (p q) until none apply.
Subgraph transform(const Subgraph& in, TransformStats* stats = nullptr);

struct PreprocessStats {
    int pruned_vertices = 0;
    int pruned_edges = 0;
    int bridges = 0;
    int rounds = 0;
    TransformStats transforms;
};

/// prune, decompose and transform, repeated on every part until nothing
/// changes. Parts come largest first. `bridge_product` is 0 when the
/// terminals cannot be connected.
Decomposition preprocess(const UncertainGraph& g, const TerminalSet& terminals, PreprocessStats* stats = nullptr);

}  // namespace netrel
