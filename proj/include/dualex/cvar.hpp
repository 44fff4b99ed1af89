#pragma once

#include <functional>
#include <optional>
#include <random>

#include "dualex/common.hpp"
#include "dualex/framework.hpp"

namespace dualex {

// Primal feasible set for the CVaR problem: a Euclidean ball or an
// axis-aligned box, both with diameter R.
struct CvarDomain {
    enum class Kind { Ball, Box } kind = Kind::Ball;
    Vec center;        // ball
    double radius = 1; // ball
    Vec lo, hi;        // box

    double diameter() const;
    void project(Vec& x) const;
    Vec some_point() const;
};

// Affine losses f_i(x) = <a_i, x> + b_i; kept explicitly so the dual value
// has a closed form over a ball.
struct AffineLosses {
    Matrix a;  // n x d
    Vec b;     // n
};

struct CvarProblem {
    std::size_t n = 0;    // number of losses
    std::size_t dim = 0;  // primal dimension
    // (i, x) -> (f_i(x), subgradient); every call is one first-order query.
    std::function<std::pair<double, Vec>(std::size_t, const Vec&)> loss;
    std::optional<AffineLosses> affine;  // set when losses are affine

    CvarDomain domain;
    double alpha = 1.0;  // CVaR level, in [1/n, 1]
    double M = 1.0;      // f_i(x) in [0, M] on X
    double G = 1.0;      // Lipschitz constant of each f_i
    double eps = 0.1;    // target accuracy, in (0, 4M)

    mutable std::uint64_t query_count = 0;

    double R() const { return domain.diameter(); }
    double lo() const { return eps / (4.0 * static_cast<double>(n) * M); }
    double hi() const { return 1.0 / (alpha * static_cast<double>(n)); }

    void validate() const;
    std::pair<double, Vec> query(std::size_t i, const Vec& x) const;

    static CvarProblem from_affine(AffineLosses losses, CvarDomain domain, double alpha,
                                   double M, double G, double eps);
    // CSV rows: b, a_1, ..., a_d (one loss per row).
    static AffineLosses load_affine_csv(const std::string& path);
};

// Tunable constants the theory leaves inside O(.) / poly(.); defaults chosen
// so the desk-scale guarantees certify within the stated runtime budgets.
struct CvarSolverConfig {
    double q_inv_cap_mult = 4.0;   // cap on max 1/q_i: mult * n^2 * M / eps
    double lambda_cap = 0.0;       // 0 = derive from the schedule mass
    double nprime_mult = 16.0;     // multiplier in the n' selection rule
    double sigma_mult = 1.0;       // second-moment bound: mult * G^2 log2(n')/alpha
    double sgd_iter_mult = 1.0;    // multiplier on (sigma R / eps')^2
    std::uint64_t sgd_iter_cap = 5'000;  // hard per-call cap on SGD steps
    // Cap on the surrogate batch-size parameter n'. The estimator draws a
    // batch of size up to n' with probability ~1/n', so this also bounds the
    // worst-case memory of a single gradient draw.
    std::uint64_t n_prime_cap = 1ull << 22;
};

// Unique maximizer of sum y_i v_i - lambda * sum y_i ln(y_i / q_i) over
// {y in simplex : lo <= y_i <= hi}: coordinatewise clip(q_i e^{v_i/lambda - 1
// - mu/lambda}, lo, hi) with mu root-found so the mass is 1: |sum - 1| <= 1e-12
// up to the summation noise floor of ~4e-16 n for very long inputs.
Vec truncated_entropic_response(const Vec& v, double lambda, const Vec& q, double lo,
                                double hi);

// Unbiased MLMC estimate of the gradient of the batch surrogate of the
// lambda-regularized CVaR objective at x, with n' = 2^(J_max + 1) controlling
// the surrogate batch size. Expected first-order queries O(log n').
Vec mlmc_gradient(const CvarProblem& problem, const Vec& x, const Vec& q, double lambda,
                  std::uint64_t n_prime, std::mt19937_64& rng);

// Recommended surrogate batch size for accuracy eps_prime (power of two).
std::uint64_t select_n_prime(const CvarProblem& problem, const Vec& q, double lambda,
                             double eps_prime, const CvarSolverConfig& cfg);

// Projected averaged SGD with the MLMC estimator: expected eps'-minimizer of
// f_{lambda,q} over X.
Vec drpo_cvar(const CvarProblem& problem, const Vec& q, double lambda, double eps_prime,
              std::mt19937_64& rng, const CvarSolverConfig& cfg = {});

// phi(y) = min_{x in X} sum y_i f_i(x), certified to inner_tol (exact closed
// form for affine losses over a ball).
double dual_value_cvar(const CvarProblem& problem, const Vec& y, double inner_tol);

struct CvarDualResult {
    Vec y;
    double certified_budget = 0.0;  // eps_K / Lambda_K divergence budget
    std::uint64_t queries = 0;
    std::size_t rounds = 0;
};

// Dual extraction on the truncated simplex: y_0 uniform, log-rounds schedule
// at target eps/2 with B = ln n and L = M; returns a point that is (in the
// mean over seeds) eps-optimal for the untruncated CVaR dual.
CvarDualResult solve_dual_cvar(const CvarProblem& problem, std::mt19937_64& rng,
                               const CvarSolverConfig& cfg = {});

}  // namespace dualex
