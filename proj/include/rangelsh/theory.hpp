#pragma once

#include <optional>
#include <span>
#include <vector>

namespace rangelsh::theory {

// Query-time exponents rho = log p1 / log p2 for the LSH schemes, all in
// natural logarithms, and the numeric side of the partitioning complexity
// argument.

/// log(1 - acos(S0)/pi) / log(1 - acos(c S0)/pi). Accepts c in (0, 1].
double rho_simple(double c, double s0);

/// Euclidean distance between transformed item and query at inner product
/// `ip` with extra residual term `residual`: sqrt(1 + m/4 - 2 U ip + residual).
/// Throws with the radicand when it is negative.
double alsh_distance(unsigned m, double scale, double ip, double residual);

double rho_alsh(double c, double s0, unsigned m, double scale, double width);

/// Norm-ranged variant for a partition with norms in (u_lo, u_hi].
double rho_alsh_ranged(double c, double s0, unsigned m, double scale, double width, double u_lo,
                       double u_hi);

struct AlshGrid {
    std::vector<unsigned> m;
    std::vector<double> scale;
    std::vector<double> width;

    /// m in 1..5, U in 0.05..0.95 step 0.05, r in 0.5..5 step 0.25.
    static AlshGrid standard();
};

struct AlshOptimum {
    unsigned m = 0;
    double scale = 0.0;
    double width = 0.0;
    double rho = 0.0;
};

/// Exhaustive minimum over feasible grid points. Ties keep the first point in
/// (m, U, r) ascending order. Throws if no point is feasible.
AlshOptimum grid_search_alsh(double c, double s0, const AlshGrid& grid);

struct TheoremReport {
    bool holds = false;
    double alpha_bound = 0.0;   // min{rho, (rho - rho*) / (1 - rho*)}
    double alpha_margin = 0.0;  // alpha_bound - alpha
    double beta_bound = 0.0;    // alpha * rho
    double beta_margin = 0.0;   // beta_bound - beta
};

/// Checks 0 < alpha < min{rho, (rho - rho*)/(1 - rho*)} and 0 < beta < alpha rho.
/// Requires 0 < rho_star < rho < 1.
TheoremReport check_theorem1(double n, double alpha, double beta, double rho, double rho_star);

/// Upper bound on f(n) / (n^rho ln n):
/// n^(alpha - rho) / ln n + n^(alpha + (1 - alpha) rho* - rho) + n^(beta - alpha rho).
double complexity_ratio(double n, double alpha, double beta, double rho, double rho_star);

/// Max of G(c, S0 / U_j) over partitions whose exponent is below G(c, S0 / U).
/// Empty when no partition qualifies (the condition is then inapplicable).
std::optional<double> rho_star(double c, double s0, std::span<const double> normalizers, double max_norm);

}  // namespace rangelsh::theory
