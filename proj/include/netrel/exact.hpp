#pragma once

#include <cstdint>

#include "netrel/graph.hpp"

namespace netrel {

template <class Real>
struct ExactResult {
    Real reliability = 0;
    /// Mass of possible graphs whose terminals are disconnected (1 - reliability).
    Real disconnected = 0;
    std::uint64_t enumerated_count = 0;
};

inline constexpr std::size_t kDefaultBruteForceCap = 24;

/// Sum of Pr[G_p] over all 2^|E| possible graphs connecting the terminals.
/// Possible graphs are visited in Gray-code order so each step flips a single
/// edge and the probability is updated incrementally. Throws CapExceeded when
/// |E| > cap.
template <class Real = double>
ExactResult<Real> brute_force_reliability(const UncertainGraph& g, const TerminalSet& t,
                                          std::size_t cap = kDefaultBruteForceCap);

extern template ExactResult<double> brute_force_reliability<double>(const UncertainGraph&, const TerminalSet&,
                                                                    std::size_t);
extern template ExactResult<Rational> brute_force_reliability<Rational>(const UncertainGraph&,
                                                                        const TerminalSet&, std::size_t);

}  // namespace netrel
