#pragma once

#include <functional>
#include <memory>

#include "dualex/common.hpp"

namespace dualex {

// First-order oracle for a smooth convex function. Gradient calls are the
// complexity currency, tallied per-oracle; copies made by wrappers share the
// same counter so a wrapped call still counts exactly once.
struct SmoothFnOracle {
    std::function<double(const Vec&)> value_fn;
    std::function<Vec(const Vec&)> grad_fn;
    double beta = 1.0;              // smoothness in the Euclidean norm
    double strong_convexity = 0.0;  // 0 when unknown
    std::shared_ptr<std::uint64_t> query_counter = std::make_shared<std::uint64_t>(0);

    double value(const Vec& x) const { return value_fn(x); }
    Vec grad(const Vec& x) const {
        ++*query_counter;
        return grad_fn(x);
    }
    std::uint64_t queries() const { return *query_counter; }
};

struct CritConfig {
    double gamma = 0.0;  // target gradient norm, must lie in (0, sqrt(2 beta Delta))
    Vec x0;
    double Delta = 0.0;  // upper bound on h(x0) - inf h

    double R() const { return 5.0 * Delta / gamma; }
    void validate(double beta) const;
};

// f(x) = h(x) + gamma^2/(16 Delta) ||x - x0||^2; strong-convexity modulus
// gamma^2/(8 Delta) recorded; each f-gradient costs one h-gradient.
SmoothFnOracle build_regularized(const SmoothFnOracle& h, const CritConfig& cfg);

// Accelerated projected gradient with monotone restarts over the ball
// B_zeta(w): returns an eps-minimizer, certified through the gradient-mapping
// gap bound (with the strong-convexity bound as a fallback when tighter).
// Query budget: c_budget * (1 + sqrt(beta zeta^2 / eps)); exceeding it throws
// ConvergenceError with the best certified gap.
Vec cgm(const SmoothFnOracle& f, double zeta, const Vec& w, double eps,
        double c_budget = 50.0);

struct CritRound {
    std::size_t k = 0;
    double zeta = 0.0;       // ball radius R/(1+Lambda_k)
    double eps = 0.0;        // CGM target eps_k/(1+Lambda_k)
    std::uint64_t cgm_queries = 0;
};

struct CritResult {
    Vec z;                  // z_K
    double grad_norm = 0.0; // ||grad h(z_K)||, computed fresh at return
    std::uint64_t queries = 0;
    std::vector<CritRound> rounds;
    std::vector<Vec> z_seq; // z_0..z_K, kept for diagnostics
};

// The shrinking-ball method: K = ceil(log_1.5(48 sqrt(beta Delta)/gamma)) + 2
// rounds with lambda_k = 2^k/32, eps_k = Delta/(64 * 1.5^k); guarantees
// ||grad h(z_K)|| <= gamma.
CritResult find_critical_point(const SmoothFnOracle& h, const CritConfig& cfg,
                               double cgm_budget = 50.0);

// Best response of the dual-regularized Fenchel game for a smooth strongly
// convex g: grad g((x + lambda grad g*(q)) / (1 + lambda)).
Vec fenchel_drbr(const std::function<Vec(const Vec&)>& g_grad,
                 const std::function<Vec(const Vec&)>& g_conj_grad, const Vec& q,
                 double lambda, const Vec& x);

// Predicate for the dual-norm bound of the ball-constrained Fenchel game on a
// regularized objective: an eps-optimal dual point must satisfy
// ||y|| <= eps * gamma / Delta (up to 1e-9 slack).
bool verify_dual_norm_bound(const Vec& y, double eps, const CritConfig& cfg);

}  // namespace dualex
