#pragma once

#include <cstdint>
#include <random>

namespace rangelsh {

/// Seeded generator with a fully specified output stream.
///
/// Engine: std::mt19937_64, whose output sequence is fixed by the C++
/// standard. Uniform doubles take the top 53 bits of one engine draw.
/// Normal variates use the Box-Muller transform on two uniforms, yielding
/// the cosine branch first and caching the sine branch for the next call.
/// None of the std:: distributions are used, since their algorithms are
/// implementation-defined and would make codes differ across toolchains.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform on [0, 1).
    double uniform();

    /// Uniform on [lo, hi].
    double uniform(double lo, double hi);

    /// Standard normal.
    double normal();

private:
    std::mt19937_64 engine_;
    double cached_normal_ = 0.0;
    bool has_cached_ = false;
};

/// Mixes a base seed with a stream index so sub-streams are decorrelated but
/// stream 0 reproduces the base seed unchanged.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
    return seed ^ stream;
}

}  // namespace rangelsh
