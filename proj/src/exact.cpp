#include "netrel/exact.hpp"

#include <bit>
#include <string>

#include "netrel/errors.hpp"

namespace netrel {

namespace {

bool connected_mask(const UncertainGraph& g, std::uint64_t existent, const std::vector<Vertex>& terminals,
                    DisjointSets& ds) {
    ds.reset(g.vertex_count());
    for (Vertex v : terminals) ds.count(v) = 1;
    const int k = static_cast<int>(terminals.size());
    for (std::uint64_t bits = existent; bits != 0; bits &= bits - 1) {
        const Edge& e = g.edge(static_cast<std::size_t>(std::countr_zero(bits)));
        if (ds.count(ds.unite(e.u, e.v)) == k) return true;
    }
    return false;
}

// Product of the nonzero factors plus a count of zero factors, so single-edge
// flips stay invertible even when p(e) = 1.
template <class Real>
struct IncrementalProduct {
    Real product = 1;
    int zeros = 0;

    void mul(const Real& f) {
        if (f == 0) ++zeros; else product *= f;
    }
    void div(const Real& f) {
        if (f == 0) --zeros; else product /= f;
    }
    Real value() const { return zeros > 0 ? Real(0) : product; }
};

}  // namespace

template <class Real>
ExactResult<Real> brute_force_reliability(const UncertainGraph& g, const TerminalSet& t, std::size_t cap) {
    const std::size_t m = g.edge_count();
    if (m > cap || m >= 63)
        throw CapExceeded("brute force: " + std::to_string(m) + " edges exceeds cap " + std::to_string(cap));

    std::vector<Real> on(m), off(m);
    for (std::size_t i = 0; i < m; ++i) {
        on[i] = from_double<Real>(g.edge(i).p);
        off[i] = Real(1) - on[i];
    }
    const std::vector<Vertex> terminals(t.vertices().begin(), t.vertices().end());

    auto fresh = [&](std::uint64_t state) {
        IncrementalProduct<Real> pr;
        for (std::size_t i = 0; i < m; ++i) pr.mul((state >> i) & 1 ? on[i] : off[i]);
        return pr;
    };

    // Rounding drift of the double path is bounded by recomputing periodically.
    constexpr std::uint64_t kRefresh = 1024;
    Accumulator<Real> connected, disconnected;
    DisjointSets ds;
    const std::uint64_t total = std::uint64_t{1} << m;
    std::uint64_t state = 0;
    IncrementalProduct<Real> pr = fresh(state);
    for (std::uint64_t step = 0; step < total; ++step) {
        if (step > 0) {
            const int bit = std::countr_zero(step);
            const std::uint64_t flip = std::uint64_t{1} << bit;
            if (state & flip) {
                pr.div(on[bit]);
                pr.mul(off[bit]);
            } else {
                pr.div(off[bit]);
                pr.mul(on[bit]);
            }
            state ^= flip;
            if constexpr (std::is_same_v<Real, double>)
                if (step % kRefresh == 0) pr = fresh(state);
        }
        const Real w = pr.value();
        if (w == 0) continue;
        if (connected_mask(g, state, terminals, ds))
            connected += w;
        else
            disconnected += w;
    }
    return {connected.value(), disconnected.value(), total};
}

template ExactResult<double> brute_force_reliability<double>(const UncertainGraph&, const TerminalSet&, std::size_t);
template ExactResult<Rational> brute_force_reliability<Rational>(const UncertainGraph&, const TerminalSet&,
                                                                 std::size_t);

}  // namespace netrel
