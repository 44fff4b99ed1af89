#pragma once

#include <cstdint>
#include <functional>

#include "dualex/common.hpp"

namespace dualex {

enum class FeasibleSet {
    AllSpace,
    UnitBall,
    Simplex,
    TruncatedSimplex,
    EuclideanBall,
};

// A distance-generating-function geometry: the regularizer r, its gradient,
// the conjugate map back onto the dual feasible set, and the induced Bregman
// divergence V_u(w) = r(w) - r(u) - <grad r(u), w - u>.
struct DgfSetup {
    std::size_t dim_dual = 0;
    FeasibleSet feasible_set = FeasibleSet::AllSpace;
    double strong_convexity_mu_r = 1.0;

    std::function<double(const Vec&)> r_value;
    std::function<Vec(const Vec&)> r_grad;
    std::function<Vec(const Vec&)> conjugate_grad_on_U;
    std::function<double(const Vec&, const Vec&)> divergence;  // (center u, point w)

    // Box metadata for the truncated simplex; unused otherwise.
    double box_lo = 0.0;
    double box_hi = 1.0;
};

// r = (1/2)||.||_2^2 over all of R^n: every map is the identity and the
// divergence is half squared distance.
DgfSetup euclidean_setup(std::size_t dim);

// Negative entropy r(u) = sum u_i ln u_i over the simplex; divergence is KL,
// conjugate map is softmax.
DgfSetup entropy_simplex_setup(std::size_t n);

// Same dgf restricted to {y in simplex : lo <= y_i <= hi}. Validates
// n*lo <= 1 <= n*hi at construction.
DgfSetup truncated_simplex_setup(std::size_t n, double lo, double hi);

// --- numerically stable simplex primitives -------------------------------

double log_sum_exp(const Vec& theta);
Vec softmax_point(const Vec& theta);

// KL(w || u) in the divergence argument order used above: center u first.
// u must be strictly positive; 0 ln 0 := 0 on w.
double kl_divergence(const Vec& u, const Vec& w);

// [q]_i proportional to prod_j [y_j]_i^(lambda_j / sum lambda); computed in
// log space as softmax of the weighted mean of ln y_j.
Vec weighted_geometric_center(const std::vector<Vec>& ys, const Vec& lambdas);

// Points returned by softmax_point / weighted_geometric_center are floored at
// 1e-300 (and renormalized) so downstream logs stay finite; this counter
// records how often the floor fired.
std::uint64_t simplex_clamp_count();
void reset_simplex_clamp_count();

}  // namespace dualex
