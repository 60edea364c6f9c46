#include "rangelsh/hash_family.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>

#include "rangelsh/dataset.hpp"
#include "rangelsh/error.hpp"

namespace rangelsh {

SignProjection::SignProjection(unsigned bits, std::size_t dim, std::uint64_t seed)
    : bits_(bits), dim_(dim), seed_(seed) {
    if (bits == 0 || bits > 64) fail("code length must be in [1, 64], got " + std::to_string(bits));
    if (dim == 0) fail("projection dimension must be positive");
    Rng rng(seed);
    directions_.resize(static_cast<std::size_t>(bits) * dim);
    for (double& v : directions_) v = rng.normal();
}

SignProjection::SignProjection(unsigned bits, std::size_t dim, std::uint64_t seed, std::vector<double> directions)
    : bits_(bits), dim_(dim), seed_(seed), directions_(std::move(directions)) {
    if (bits == 0 || bits > 64) fail("code length must be in [1, 64], got " + std::to_string(bits));
    if (directions_.size() != static_cast<std::size_t>(bits) * dim) fail("projection matrix has wrong size");
}

BinaryCode sign_hash(const SignProjection& proj, std::span<const double> v) {
    if (v.size() != proj.dim()) {
        fail("dimension mismatch: projection expects " + std::to_string(proj.dim()) + ", got " +
             std::to_string(v.size()));
    }
    BinaryCode code{0, proj.bits()};
    for (unsigned i = 0; i < proj.bits(); ++i) {
        if (dot(proj.row(i), v) >= 0.0) code.bits |= std::uint64_t{1} << i;
    }
    return code;
}

double collision_prob_sign(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) fail("dimension mismatch in collision_prob_sign");
    const double nx = l2_norm(x);
    const double ny = l2_norm(y);
    if (nx <= 0.0 || ny <= 0.0) fail("collision_prob_sign needs nonzero vectors");
    // Angle from the half-angle form 2 atan2(|x^ - y^|, |x^ + y^|); acos of the
    // cosine loses about 8 digits near 0 and pi.
    double diff = 0.0, sum = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double a = x[i] / nx, b = y[i] / ny;
        diff += (a - b) * (a - b);
        sum += (a + b) * (a + b);
    }
    const double angle = 2.0 * std::atan2(std::sqrt(diff), std::sqrt(sum));
    return 1.0 - std::clamp(angle, 0.0, std::numbers::pi) / std::numbers::pi;
}

L2HashFunction L2HashFunction::sample(std::size_t dim, double width, Rng& rng) {
    if (!(width > 0.0)) fail("L2 hash width must be positive");
    L2HashFunction h;
    h.direction.resize(dim);
    for (double& v : h.direction) v = rng.normal();
    h.offset = rng.uniform(0.0, width);
    h.width = width;
    return h;
}

std::int64_t l2_hash(const L2HashFunction& h, std::span<const double> v) {
    if (v.size() != h.direction.size()) {
        fail("dimension mismatch: hash expects " + std::to_string(h.direction.size()) + ", got " +
             std::to_string(v.size()));
    }
    return static_cast<std::int64_t>(std::floor((dot(h.direction, v) + h.offset) / h.width));
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double collision_prob_l2(double distance, double width) {
    if (!(distance >= 0.0)) fail("distance must be nonnegative");
    if (!(width > 0.0)) fail("L2 hash width must be positive");
    if (distance == 0.0) return 1.0;
    const double ratio = width / distance;
    const double tail = 2.0 * distance / (std::sqrt(2.0 * std::numbers::pi) * width) *
                        -std::expm1(-0.5 * ratio * ratio);
    return 1.0 - 2.0 * normal_cdf(-ratio) - tail;
}

unsigned hamming_matches(const BinaryCode& a, const BinaryCode& b) {
    if (a.length != b.length) {
        fail("code length mismatch: " + std::to_string(a.length) + " vs " + std::to_string(b.length));
    }
    return a.length - static_cast<unsigned>(std::popcount((a.bits ^ b.bits) & low_mask(a.length)));
}

}  // namespace rangelsh
