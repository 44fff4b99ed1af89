#pragma once

#include <functional>
#include <random>

#include "dualex/common.hpp"
#include "dualex/setups.hpp"

namespace dualex {

// Round count K, dual-regularization weights lambda_0..lambda_{K-1}, and
// primal accuracy targets eps_1..eps_K (stored 0-based: eps_primal[k-1]).
struct Schedule {
    std::size_t K = 0;
    Vec lambdas;
    Vec eps_primal;

    void validate() const;
    // Lambda_k = sum_{j<k} lambda_j (so Lambda_1 = lambda_0).
    double cumulative(std::size_t k) const;
};

// lambda_k = 2^k * eps/(4B), eps_k = eps/(4K),
// K = ceil(max{log2(L^2 B / (mu_r eps^2)), 1}) + 10.
// Downstream guarantee: the final dual point is eps-suboptimal in expectation.
Schedule schedule_log_rounds(double eps, double B, double L, double mu_r);

// lambda_k = 2^k * eps/(4B), eps_k = eps/(8 * 1.5^k) for a caller-chosen K.
// Downstream guarantee: E||y_K - u|| <= (1/1.5^K) sqrt(2B/mu_r) for some
// eps-optimal u.
Schedule schedule_geometric_accuracy(double eps, double B, std::size_t K);

// DRPO returns an eps'-minimizer of the lambda-regularized primal objective
// f_{lambda,q}; DRBR returns the exact dual best response to a primal point
// under the same regularization. f_lambda_q is only needed for boosting.
struct OracleSuite {
    std::function<Vec(const Vec& q, double lambda, double eps_prime, std::mt19937_64&)> drpo;
    std::function<Vec(const Vec& q, double lambda, const Vec& x)> drbr;
    std::function<double(const Vec& x, const Vec& q, double lambda)> f_lambda_q;
};

struct RoundRecord {
    std::size_t k = 0;       // 1-based round index
    double Lambda = 0.0;     // cumulative weight entering this round
    double eps_primal = 0.0; // accuracy requested from DRPO
    Vec q, x, y;             // empty when full storage is disabled
    double q_norm = 0.0, x_norm = 0.0, y_norm = 0.0;
};

struct ExtractionResult {
    Vec y_final;
    std::vector<RoundRecord> rounds;
    // eps_K / Lambda_K: the certified bound on E V_{y_K}(u) at any comparator.
    double certified_divergence_budget = 0.0;
    std::size_t drpo_calls = 0;
    std::size_t drbr_calls = 0;
};

// Weighted-divergence minimizer argmin_q sum_j (lambda_j/Lambda) V_{y_j}(q),
// computed through the conjugate map: grad r*_U((1/Lambda) sum lambda_j grad r(y_j)).
Vec aggregate_center(const DgfSetup& setup, const std::vector<Vec>& centers,
                     const Vec& weights);

// The recursive dual-regularization loop: K rounds of aggregate / DRPO / DRBR.
// Per-round points are stored in full when store_full (the default; disable
// for large dimensions to keep only norms).
ExtractionResult run_dual_extraction(const DgfSetup& setup, const OracleSuite& oracles,
                                     const Vec& y0, const Schedule& schedule,
                                     std::mt19937_64& rng, bool store_full = true);

// Number of base-oracle calls needed to push a per-call failure probability p
// down to delta: ceil(log2(1/delta)/log2(1/p)).
std::size_t boost_call_count(double p, double delta);

// Wraps an oracle that fails with probability at most p: calls it
// boost_call_count(p, delta) times and keeps the output with the smallest
// regularized objective value, succeeding with probability >= 1 - delta.
std::function<Vec(const Vec&, double, double, std::mt19937_64&)> boost_success_probability(
    std::function<Vec(const Vec&, double, double, std::mt19937_64&)> drposp, double p,
    double delta, std::function<double(const Vec& x, const Vec& q, double lambda)> f_eval);

}  // namespace dualex
