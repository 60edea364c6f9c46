#include "rangelsh/transforms.hpp"

#include <algorithm>
#include <cmath>

#include "rangelsh/error.hpp"

namespace rangelsh {

void check_unit_query(std::span<const double> q) {
    const double norm = l2_norm(q);
    if (std::abs(norm - 1.0) > kUnitQueryTolerance) {
        fail("query is not unit length (norm " + std::to_string(norm) + "); normalize queries first");
    }
}

Vector simple_transform_item(const SimpleTransformConfig& cfg, std::span<const double> x) {
    const double norm = l2_norm(x);
    Vector out(x.size() + 1, 0.0);
    if (cfg.normalizer <= 0.0) {
        if (norm != 0.0 || cfg.normalizer < 0.0) fail("normalizer must be positive");
        out.back() = 1.0;
        return out;
    }
    if (norm > cfg.normalizer * (1.0 + kNormTolerance)) {
        fail("item norm " + std::to_string(norm) + " exceeds normalizer " + std::to_string(cfg.normalizer));
    }
    double sq = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        out[i] = x[i] / cfg.normalizer;
        sq += out[i] * out[i];
    }
    out.back() = std::sqrt(std::max(0.0, 1.0 - sq));
    return out;
}

Vector simple_transform_query(std::span<const double> q) {
    check_unit_query(q);
    Vector out(q.begin(), q.end());
    out.push_back(0.0);
    return out;
}

Vector alsh_transform_item(const AlshTransformConfig& cfg, std::span<const double> x) {
    if (cfg.m == 0) fail("ALSH augmentation count m must be at least 1");
    Vector out;
    out.reserve(x.size() + cfg.m);
    double sq = 0.0;
    for (double v : x) {
        out.push_back(cfg.scale * v);
        sq += out.back() * out.back();
    }
    if (std::sqrt(sq) >= 1.0) {
        fail("scaled item norm " + std::to_string(std::sqrt(sq)) + " is not below 1; reduce the ALSH scale");
    }
    double power = sq;  // |Ux|^2, then |Ux|^4, ...
    for (unsigned i = 0; i < cfg.m; ++i) {
        out.push_back(power);
        power *= power;
    }
    return out;
}

Vector alsh_transform_query(const AlshTransformConfig& cfg, std::span<const double> q) {
    if (cfg.m == 0) fail("ALSH augmentation count m must be at least 1");
    check_unit_query(q);
    Vector out(q.begin(), q.end());
    out.insert(out.end(), cfg.m, 0.5);
    return out;
}

}  // namespace rangelsh
