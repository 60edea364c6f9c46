#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "rangelsh/random.hpp"

namespace rangelsh {

/// Up to 64 sign bits. Bit i (LSB = 0) holds the sign of projection row i.
struct BinaryCode {
    std::uint64_t bits = 0;
    unsigned length = 0;

    friend bool operator==(const BinaryCode&, const BinaryCode&) = default;
};

/// L x D matrix of i.i.d. standard normal directions for sign random projection.
class SignProjection {
public:
    SignProjection() = default;
    SignProjection(unsigned bits, std::size_t dim, std::uint64_t seed);
    /// Rebuilds a projection from stored rows (snapshot loading).
    SignProjection(unsigned bits, std::size_t dim, std::uint64_t seed, std::vector<double> directions);

    unsigned bits() const noexcept { return bits_; }
    std::size_t dim() const noexcept { return dim_; }
    std::uint64_t seed() const noexcept { return seed_; }

    std::span<const double> row(unsigned i) const { return {directions_.data() + i * dim_, dim_}; }
    std::span<const double> directions() const noexcept { return directions_; }

private:
    unsigned bits_ = 0;
    std::size_t dim_ = 0;
    std::uint64_t seed_ = 0;
    std::vector<double> directions_;
};

/// Bit i is 1 iff row_i . v >= 0.
BinaryCode sign_hash(const SignProjection& proj, std::span<const double> v);

/// 1 - angle(x, y) / pi.
double collision_prob_sign(std::span<const double> x, std::span<const double> y);

/// floor((a . v + b) / r) with a ~ N(0, I), b ~ U[0, r].
struct L2HashFunction {
    std::vector<double> direction;
    double offset = 0.0;
    double width = 1.0;

    static L2HashFunction sample(std::size_t dim, double width, Rng& rng);
};

std::int64_t l2_hash(const L2HashFunction& h, std::span<const double> v);

/// Standard normal CDF through erfc; absolute error well below 1e-12.
double normal_cdf(double x);

/// Collision probability F_r(d) of the width-r L2 hash for two points at
/// Euclidean distance d. Returns 1 at d = 0.
double collision_prob_l2(double distance, double width);

/// Number of agreeing bit positions, L - popcount(a ^ b).
unsigned hamming_matches(const BinaryCode& a, const BinaryCode& b);

inline std::uint64_t low_mask(unsigned bits) {
    return bits >= 64 ? ~std::uint64_t{0} : ((std::uint64_t{1} << bits) - 1);
}

}  // namespace rangelsh
