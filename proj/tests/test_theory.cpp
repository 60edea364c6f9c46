#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "rangelsh/error.hpp"
#include "rangelsh/random.hpp"
#include "rangelsh/theory.hpp"

using namespace rangelsh;
using namespace rangelsh::theory;

namespace {

double f_quadrature(double d, double r) {
    const int steps = 20000;
    const double h = r / steps;
    auto f = [&](double t) {
        const double z = t / d;
        return 2.0 / d * std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi) * (1.0 - t / r);
    };
    double sum = f(0.0) + f(r);
    for (int i = 1; i < steps; ++i) sum += (i % 2 ? 4.0 : 2.0) * f(i * h);
    return sum * h / 3.0;
}

// Independent evaluation of the ranged exponent straight from the distances.
double rho_ranged_reference(double c, double s0, unsigned m, double u, double r, double lo, double hi) {
    const double e = std::pow(2.0, m + 1);
    const double near = std::sqrt(1.0 + m / 4.0 - 2.0 * u * s0 + std::pow(u * hi, e));
    const double far = std::sqrt(1.0 + m / 4.0 - 2.0 * c * u * s0 + std::pow(u * lo, e));
    return std::log(f_quadrature(near, r)) / std::log(f_quadrature(far, r));
}

double rho_simple_reference(double c, double s0) {
    const double pi = std::numbers::pi;
    return std::log(1.0 - std::acos(s0) / pi) / std::log(1.0 - std::acos(c * s0) / pi);
}

}  // namespace

TEST(RhoSimple, ReferenceValue) {
    EXPECT_NEAR(rho_simple(0.5, 0.5), 0.7453608285475100, 1e-14);
    EXPECT_NEAR(rho_simple(0.5, 0.5), rho_simple_reference(0.5, 0.5), 1e-15);
}

TEST(RhoSimple, LimitAtCOne) {
    EXPECT_DOUBLE_EQ(rho_simple(1.0, 0.7), 1.0);
    for (double s0 : {0.1, 0.5, 0.9}) EXPECT_NEAR(rho_simple(1.0 - 1e-9, s0), 1.0, 1e-6);
}

TEST(RhoSimple, RangeAndMonotonicity) {
    for (int ci = 1; ci <= 9; ++ci) {
        const double c = ci / 10.0;
        double prev = 2.0;
        for (int si = 1; si <= 9; ++si) {
            const double s0 = si / 10.0;
            const double rho = rho_simple(c, s0);
            EXPECT_GT(rho, 0.0);
            EXPECT_LT(rho, 1.0);
            EXPECT_LT(rho, prev) << "c " << c << " s0 " << s0;
            prev = rho;
            if (ci > 1) EXPECT_GT(rho, rho_simple(c - 0.1, s0));
        }
    }
}

TEST(RhoSimple, DomainErrors) {
    EXPECT_THROW(rho_simple(0.5, 0.0), Error);
    EXPECT_THROW(rho_simple(0.5, 1.2), Error);
    EXPECT_THROW(rho_simple(0.0, 0.5), Error);
    EXPECT_THROW(rho_simple(1.5, 0.5), Error);
}

TEST(RhoAlsh, ReferenceValue) {
    EXPECT_NEAR(rho_alsh(0.5, 0.9, 3, 0.83, 2.5), 0.4693229621287054, 1e-13);
    EXPECT_NEAR(rho_alsh(0.5, 0.9, 3, 0.83, 2.5), rho_ranged_reference(0.5, 0.9, 3, 0.83, 2.5, 0.0, 0.9), 1e-10);
}

TEST(RhoAlsh, DistanceArguments) {
    const double ip = 0.83 * 0.9;
    EXPECT_NEAR(alsh_distance(3, 0.83, 0.9, std::pow(ip, 16)), 0.51516991219245, 1e-13);
    EXPECT_NEAR(alsh_distance(3, 0.83, 0.45, 0.0), 1.00149887668434, 1e-13);
    try {
        alsh_distance(1, 1.0, 2.0, 0.0);
        FAIL();
    } catch (const Error& e) {
        EXPECT_NE(std::string(e.what()).find("-2.75"), std::string::npos) << e.what();
    }
}

TEST(RhoAlsh, ApproachesOneAsCGoesToOne) {
    const double rho = rho_alsh(1.0 - 1e-7, 0.9, 5, 0.5, 2.5);
    EXPECT_LT(rho, 1.0);
    EXPECT_GT(rho, 1.0 - 1e-4);
}

TEST(RhoAlshRanged, DegeneratesToPlain) {
    Rng rng(3);
    for (int t = 0; t < 50; ++t) {
        const double s0 = rng.uniform(0.3, 1.0);
        const double c = rng.uniform(0.1, 0.95);
        const unsigned m = 1 + static_cast<unsigned>(rng.uniform() * 4);
        const double u = rng.uniform(0.3, 0.95);
        const double r = rng.uniform(0.5, 5.0);
        EXPECT_NEAR(rho_alsh_ranged(c, s0, m, u, r, 0.0, s0), rho_alsh(c, s0, m, u, r), 1e-12);
    }
}

TEST(RhoAlshRanged, ConcreteImprovement) {
    const double plain = rho_alsh(0.5, 0.9, 3, 0.83, 2.5);
    const double ranged = rho_alsh_ranged(0.5, 0.9, 3, 0.83, 2.5, 0.4, 0.9);
    EXPECT_NEAR(ranged, 0.4693229561635754, 1e-13);
    EXPECT_LT(ranged, plain);
    EXPECT_NEAR(ranged, rho_ranged_reference(0.5, 0.9, 3, 0.83, 2.5, 0.4, 0.9), 1e-10);
}

TEST(RhoAlshRanged, ImprovementProperty) {
    Rng rng(2718);
    int checked = 0;
    while (checked < 200) {
        const double s0 = rng.uniform(0.5, 1.0);
        const double u = rng.uniform(0.6, 0.95);
        const unsigned m = 1 + static_cast<unsigned>(rng.uniform() * 3);
        const double c = rng.uniform(0.2, 0.9);
        const double r = rng.uniform(1.0, 4.0);
        const double lo = rng.uniform(0.5 * s0, s0);
        const double hi = rng.uniform(lo, s0);
        if (!(hi > lo)) continue;
        double ranged = 0.0, plain = 0.0;
        try {
            ranged = rho_alsh_ranged(c, s0, m, u, r, lo, hi);
            plain = rho_alsh(c, s0, m, u, r);
        } catch (const Error&) {
            continue;  // negative radicand: infeasible draw
        }
        EXPECT_LT(ranged, plain);
        ++checked;
    }
}

TEST(GridSearch, SingletonAndEmpty) {
    AlshGrid one{{3}, {0.83}, {2.5}};
    const AlshOptimum best = grid_search_alsh(0.5, 0.9, one);
    EXPECT_EQ(best.m, 3u);
    EXPECT_EQ(best.scale, 0.83);
    EXPECT_EQ(best.width, 2.5);
    EXPECT_EQ(best.rho, rho_alsh(0.5, 0.9, 3, 0.83, 2.5));

    AlshGrid bad{{1}, {3.0}, {2.5}};
    EXPECT_THROW(grid_search_alsh(0.5, 0.9, bad), Error);
}

TEST(GridSearch, StandardGridNoWorseThanRecommended) {
    const AlshGrid grid = AlshGrid::standard();
    EXPECT_EQ(grid.m.size(), 5u);
    EXPECT_EQ(grid.scale.size(), 19u);
    EXPECT_EQ(grid.width.size(), 19u);
    const AlshOptimum best = grid_search_alsh(0.5, 0.9, grid);
    EXPECT_LE(best.rho, rho_alsh(0.5, 0.9, 3, 0.83, 2.5));
    for (unsigned m : grid.m) {
        for (double u : grid.scale) {
            for (double r : grid.width) {
                try {
                    EXPECT_LE(best.rho, rho_alsh(0.5, 0.9, m, u, r));
                } catch (const Error&) {
                }
            }
        }
    }
}

TEST(Theorem1, ExampleAndBoundaries) {
    const TheoremReport ok = check_theorem1(1e6, 0.3, 0.2, 0.8, 0.5);
    EXPECT_TRUE(ok.holds);
    EXPECT_NEAR(ok.alpha_bound, 0.6, 1e-15);
    EXPECT_NEAR(ok.beta_bound, 0.24, 1e-15);
    EXPECT_NEAR(ok.alpha_margin, 0.3, 1e-15);
    EXPECT_NEAR(ok.beta_margin, 0.04, 1e-15);

    EXPECT_FALSE(check_theorem1(1e6, (0.8 - 0.5) / (1 - 0.5), 0.1, 0.8, 0.5).holds);
    EXPECT_FALSE(check_theorem1(1e6, 0.8, 0.1, 0.8, 0.5).holds);
    EXPECT_FALSE(check_theorem1(1e6, 0.3, 0.24, 0.8, 0.5).holds);
    EXPECT_FALSE(check_theorem1(1e6, 0.8, 0.1, 0.8, 0.0001).holds);
    EXPECT_THROW(check_theorem1(1e6, 0.3, 0.2, 0.5, 0.8), Error);
    EXPECT_THROW(check_theorem1(1e6, 0.3, 0.2, 1.0, 0.5), Error);
}

TEST(ComplexityRatio, TermsAndDecrease) {
    auto terms = [](double n) {
        const double a = 0.3, b = 0.2, rho = 0.8, rs = 0.5;
        return std::array<double, 3>{std::pow(n, a - rho) / std::log(n), std::pow(n, a + (1 - a) * rs - rho),
                                     std::pow(n, b - a * rho)};
    };
    const auto t3 = terms(1e3);
    EXPECT_NEAR(t3[0], 0.00457786579, 1e-11);
    EXPECT_NEAR(t3[1], 0.35481338923, 1e-11);
    EXPECT_NEAR(t3[2], 0.75857757503, 1e-11);
    const auto t6 = terms(1e6);
    EXPECT_NEAR(t6[0], 7.238241365e-5, 1e-14);
    EXPECT_NEAR(t6[1], 0.12589254118, 1e-11);
    EXPECT_NEAR(t6[2], 0.57543993734, 1e-11);

    EXPECT_NEAR(complexity_ratio(1e3, 0.3, 0.2, 0.8, 0.5), 1.117968830056, 1e-11);
    EXPECT_NEAR(complexity_ratio(1e6, 0.3, 0.2, 0.8, 0.5), 0.701404860930, 1e-11);
    EXPECT_NEAR(complexity_ratio(1e9, 0.3, 0.2, 0.8, 0.5), 0.481185717411, 1e-11);
    EXPECT_NEAR(complexity_ratio(1e12, 0.3, 0.2, 0.8, 0.5), 0.346980089598, 1e-11);
    double prev = 1e300;
    for (double n : {1e3, 1e6, 1e9, 1e12}) {
        const double r = complexity_ratio(n, 0.3, 0.2, 0.8, 0.5);
        EXPECT_LT(r, prev);
        prev = r;
    }
}

TEST(Theorem1, HoldsImpliesDecreasingRatio) {
    Rng rng(5);
    int checked = 0;
    while (checked < 100) {
        const double rho = rng.uniform(0.3, 0.95);
        const double rs = rng.uniform(0.05, rho - 0.01);
        const double a = rng.uniform(0.01, 0.95);
        const double b = rng.uniform(0.0, 0.95);
        if (!check_theorem1(1e6, a, b, rho, rs).holds || b <= 0.0) continue;
        double prev = 1e300;
        for (double n : {1e3, 1e6, 1e9, 1e12}) {
            const double r = complexity_ratio(n, a, b, rho, rs);
            EXPECT_LT(r, prev);
            prev = r;
        }
        ++checked;
    }
}

TEST(RhoStar, PicksWorstImprovedPartition) {
    // Normalizers below the global max raise S0 / U_j and so lower the exponent.
    const std::vector<double> u = {0.5, 2.0, 4.0};
    const auto rs = rho_star(0.5, 0.4, u, 4.0);
    ASSERT_TRUE(rs.has_value());
    EXPECT_NEAR(*rs, rho_simple(0.5, 0.4 / 2.0), 1e-15);
    EXPECT_LT(*rs, rho_simple(0.5, 0.4 / 4.0));

    const std::vector<double> flat = {4.0, 4.0};
    EXPECT_FALSE(rho_star(0.5, 0.4, flat, 4.0).has_value());
}
