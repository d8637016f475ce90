#pragma once

#include <cstdint>
#include <initializer_list>

namespace netrel {

inline constexpr std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Counter-based generator: the n-th output of a stream is a pure function of
/// (seed, stream id, n). Streams are split off by hashing a path of ids, so
/// each sampling batch owns an independent, replayable sequence regardless of
/// which thread consumes it.
class CounterRng {
public:
    using result_type = std::uint64_t;

    CounterRng(std::uint64_t seed, std::uint64_t stream)
        : key_(mix64(seed ^ mix64(stream ^ 0x632be59bd9b4e019ULL))) {}

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return ~result_type{0}; }

    result_type operator()() { return mix64(key_ + (++counter_) * 0xd1b54a32d192ed03ULL); }

    /// Uniform double in [0, 1) with 53-bit resolution.
    double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

    /// Child stream keyed by `id`.
    CounterRng split(std::uint64_t id) const { return CounterRng(key_, id); }

    std::uint64_t counter() const { return counter_; }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

/// Stream id for a path of integers (part, pool, unit, ...).
inline std::uint64_t stream_id(std::initializer_list<std::uint64_t> path) {
    std::uint64_t h = 0x243f6a8885a308d3ULL;
    for (auto v : path) h = mix64(h ^ mix64(v + 0x13198a2e03707344ULL));
    return h;
}

}  // namespace netrel
