#pragma once

#include <span>

#include "rangelsh/dataset.hpp"

namespace rangelsh {

// Reductions of inner-product search to angular and Euclidean search.

struct SimpleTransformConfig {
    double normalizer = 1.0;
};

struct AlshTransformConfig {
    unsigned m = 3;
    double scale = 0.83;
    double width = 2.5;
};

inline constexpr double kNormTolerance = 1e-9;
inline constexpr double kUnitQueryTolerance = 1e-6;

/// [x/U ; sqrt(max(0, 1 - |x/U|^2))]. A zero normalizer is accepted only for
/// the zero vector, whose image is [0 ; 1].
Vector simple_transform_item(const SimpleTransformConfig& cfg, std::span<const double> x);

/// [q ; 0] for a unit query.
Vector simple_transform_query(std::span<const double> q);

/// [Ux ; |Ux|^2 ; |Ux|^4 ; ... ; |Ux|^(2^m)].
Vector alsh_transform_item(const AlshTransformConfig& cfg, std::span<const double> x);

/// [q ; 1/2 ; ... ; 1/2] with m halves.
Vector alsh_transform_query(const AlshTransformConfig& cfg, std::span<const double> q);

void check_unit_query(std::span<const double> q);

}  // namespace rangelsh
