#include "rangelsh/theory.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "rangelsh/error.hpp"
#include "rangelsh/hash_family.hpp"

namespace rangelsh::theory {

namespace {

double angular_collision(double s) { return 1.0 - std::acos(std::clamp(s, -1.0, 1.0)) / std::numbers::pi; }

void check_c_s0(double c, double s0) {
    if (!(c > 0.0 && c <= 1.0)) fail("approximation ratio c must lie in (0, 1], got " + std::to_string(c));
    if (!(s0 > 0.0 && s0 <= 1.0)) fail("threshold S0 must lie in (0, 1], got " + std::to_string(s0));
}

// (base)^(2^(m+1)) by repeated squaring.
double tower(double base, unsigned m) {
    double v = base;
    for (unsigned i = 0; i <= m; ++i) v *= v;
    return v;
}

double log_ratio(double p1, double p2) {
    if (!(p1 > 0.0 && p2 > 0.0)) fail("collision probability must be positive");
    if (p2 >= 1.0) fail("denominator collision probability is 1; rho is undefined");
    return std::log(p1) / std::log(p2);
}

}  // namespace

double rho_simple(double c, double s0) {
    check_c_s0(c, s0);
    if (s0 >= 1.0 && c >= 1.0) fail("rho is undefined at c = S0 = 1");
    return log_ratio(angular_collision(s0), angular_collision(c * s0));
}

double alsh_distance(unsigned m, double scale, double ip, double residual) {
    const double radicand = 1.0 + m / 4.0 - 2.0 * scale * ip + residual;
    if (radicand < 0.0) fail("ALSH distance radicand is negative: " + std::to_string(radicand));
    return std::sqrt(radicand);
}

double rho_alsh(double c, double s0, unsigned m, double scale, double width) {
    return rho_alsh_ranged(c, s0, m, scale, width, 0.0, s0);
}

double rho_alsh_ranged(double c, double s0, unsigned m, double scale, double width, double u_lo, double u_hi) {
    check_c_s0(c, s0);
    if (m == 0) fail("ALSH augmentation count m must be at least 1");
    if (!(scale > 0.0)) fail("ALSH scale U must be positive");
    if (!(width > 0.0)) fail("ALSH bucket width r must be positive");
    if (!(u_lo >= 0.0 && u_lo < u_hi)) fail("norm bounds must satisfy 0 <= uLo < uHi");
    const double near = alsh_distance(m, scale, s0, tower(scale * u_hi, m));
    const double far = alsh_distance(m, scale, c * s0, tower(scale * u_lo, m));
    return log_ratio(collision_prob_l2(near, width), collision_prob_l2(far, width));
}

AlshGrid AlshGrid::standard() {
    AlshGrid grid;
    for (unsigned m = 1; m <= 5; ++m) grid.m.push_back(m);
    for (int i = 1; i <= 19; ++i) grid.scale.push_back(0.05 * i);
    for (int i = 2; i <= 20; ++i) grid.width.push_back(0.25 * i);
    return grid;
}

AlshOptimum grid_search_alsh(double c, double s0, const AlshGrid& grid) {
    check_c_s0(c, s0);
    AlshOptimum best;
    bool found = false;
    for (unsigned m : grid.m) {
        for (double u : grid.scale) {
            for (double r : grid.width) {
                double rho = 0.0;
                try {
                    rho = rho_alsh(c, s0, m, u, r);
                } catch (const Error&) {
                    continue;
                }
                if (!std::isfinite(rho)) continue;
                if (!found || rho < best.rho) {
                    best = {m, u, r, rho};
                    found = true;
                }
            }
        }
    }
    if (!found) fail("no feasible point in the ALSH parameter grid");
    return best;
}

TheoremReport check_theorem1(double n, double alpha, double beta, double rho, double rho_star) {
    if (!(rho_star > 0.0 && rho_star < rho && rho < 1.0)) fail("need 0 < rho* < rho < 1");
    if (!(n >= 2.0)) fail("n must be at least 2");
    TheoremReport r;
    r.alpha_bound = std::min(rho, (rho - rho_star) / (1.0 - rho_star));
    r.alpha_margin = r.alpha_bound - alpha;
    r.beta_bound = alpha * rho;
    r.beta_margin = r.beta_bound - beta;
    r.holds = alpha > 0.0 && beta > 0.0 && r.alpha_margin > 0.0 && r.beta_margin > 0.0;
    return r;
}

double complexity_ratio(double n, double alpha, double beta, double rho, double rho_star) {
    if (!(rho_star > 0.0 && rho_star < rho && rho < 1.0)) fail("need 0 < rho* < rho < 1");
    if (!(n >= 2.0)) fail("n must be at least 2");
    const double merge = std::pow(n, alpha - rho) / std::log(n);
    const double partitions = std::pow(n, alpha + (1.0 - alpha) * rho_star - rho);
    const double top = std::pow(n, beta - alpha * rho);
    return merge + partitions + top;
}

std::optional<double> rho_star(double c, double s0, std::span<const double> normalizers, double max_norm) {
    if (!(max_norm > 0.0)) fail("max norm must be positive");
    const double rho = rho_simple(c, std::min(1.0, s0 / max_norm));
    std::optional<double> best;
    for (double u : normalizers) {
        if (!(u > 0.0)) continue;
        const double rj = rho_simple(c, std::min(1.0, s0 / u));
        if (rj < rho && (!best || rj > *best)) best = rj;
    }
    return best;
}

}  // namespace rangelsh::theory
