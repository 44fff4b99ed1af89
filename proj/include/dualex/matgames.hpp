#pragma once

#include <random>
#include <string>

#include "dualex/common.hpp"
#include "dualex/framework.hpp"

namespace dualex {

enum class PrimalDomain { Ball, Simplex };

// Bilinear game psi(x, y) = x^T A y with x in the unit Euclidean ball or the
// simplex (rows side, dimension d) and y in the simplex (columns side, n).
struct MatrixGame {
    Matrix A;  // d x n
    PrimalDomain primal_domain = PrimalDomain::Ball;

    std::size_t d() const { return A.rows; }
    std::size_t n() const { return A.cols; }

    // Ball variant: every column of A must have l2 norm <= 1.
    // Simplex variant: max |A_ij| <= 1. Throws on violation.
    void validate() const;

    // CSV: d rows of n comma-separated values, optional single header row.
    static Matrix load_csv(const std::string& path, bool has_header = false);
    static void save_csv(const Matrix& A, const std::string& path);

    // Binary: magic "DXMG", then u64 d, u64 n, then d*n doubles row-major,
    // all little-endian.
    static Matrix load_binary(const std::string& path);
    static void save_binary(const Matrix& A, const std::string& path);
};

// f(x) = max_i [A^T x]_i  (ties to the lowest index are value-irrelevant).
double primal_value(const MatrixGame& game, const Vec& x);

// phi(y) = min_{x in X} x^T A y: ball -> -||Ay||_2, simplex -> min_j [Ay]_j.
double dual_value(const MatrixGame& game, const Vec& y);

// f_{lambda,q}(x) = lambda * ln sum_i q_i exp([A^T x]_i / lambda).
double regularized_primal_value(const MatrixGame& game, const Vec& x, const Vec& q,
                                double lambda);

// Deterministic DRPO: accelerated projected gradient on f_{lambda,q} over the
// primal domain, terminating when the certified duality gap (against the
// softmax response) drops below eps_prime. Throws ConvergenceError if the
// iteration cap (1e6) is reached first.
Vec drpo_matgame(const MatrixGame& game, const Vec& q, double lambda, double eps_prime);

// [y]_i proportional to q_i * exp([A^T x]_i / Lambda), i.e. the exact
// entropically regularized best response.
Vec drbr_matgame(const Vec& q, double Lambda, const Vec& Atx);

struct MatGameDualResult {
    Vec y;
    // f(x_hat) - phi(y) for the best primal iterate seen; >= true gap of y.
    double duality_gap_certificate = 0.0;
    std::size_t K_used = 0;
    std::uint64_t matvec_count = 0;    // A or A^T products across all rounds
    std::uint64_t drpo_iterations = 0;
    std::vector<RoundRecord> rounds;
};

// The doubling-schedule dual solver: lambda_k = 2^k eps/(4 ln n),
// eps_k = eps/(4K), K = ceil(max{log2(ln n / eps^2), 1}) + 10, y_0 uniform.
MatGameDualResult solve_dual_matgame(const MatrixGame& game, double eps,
                                     std::mt19937_64& rng, bool store_rounds = false);

// eps-optimal primal point for the simplex variant via the negated transpose:
// the primal of A is the dual of -A^T.
Vec solve_primal_simplex_matgame(const MatrixGame& game, double eps, std::mt19937_64& rng);

}  // namespace dualex
