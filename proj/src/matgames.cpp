#include "dualex/matgames.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include "dualex/kernels.hpp"
#include "dualex/setups.hpp"

namespace dualex {

namespace {

constexpr double kNormSlack = 1e-9;

void project_ball(Vec& x) {
    const double n = kernels::nrm2(x);
    if (n > 1.0)
        for (double& v : x) v /= n;
}

// Euclidean projection onto the simplex (sort-based).
void project_simplex(Vec& v) {
    Vec u = v;
    std::sort(u.begin(), u.end(), std::greater<double>());
    double cum = 0.0, tau = 0.0;
    std::size_t rho = 0;
    for (std::size_t j = 0; j < u.size(); ++j) {
        cum += u[j];
        const double t = (cum - 1.0) / static_cast<double>(j + 1);
        if (u[j] - t > 0.0) {
            rho = j + 1;
            tau = t;
        }
    }
    (void)rho;
    for (double& x : v) x = std::max(x - tau, 0.0);
}

void project_domain(PrimalDomain dom, Vec& x) {
    if (dom == PrimalDomain::Ball)
        project_ball(x);
    else
        project_simplex(x);
}

bool feasible(PrimalDomain dom, const Vec& x) {
    if (dom == PrimalDomain::Ball) return kernels::nrm2(x) <= 1.0 + 1e-9;
    double s = 0.0;
    for (double v : x) {
        if (v < -1e-12) return false;
        s += v;
    }
    return std::abs(s - 1.0) <= 1e-9;
}

// Spectral norm estimate by power iteration on A^T A.
double spectral_norm_sq(const Matrix& A, std::uint64_t* matvecs) {
    if (A.rows == 0 || A.cols == 0) return 0.0;
    Vec v(A.cols, 1.0 / std::sqrt(static_cast<double>(A.cols)));
    Vec av, atav;
    double est = 0.0;
    for (int it = 0; it < 20; ++it) {
        kernels::gemv(A, v, av);
        kernels::gemv_t(A, av, atav);
        if (matvecs) *matvecs += 2;
        const double n = kernels::nrm2(atav);
        if (n < 1e-300) return 0.0;
        est = n;  // Rayleigh-style estimate of ||A||_2^2
        for (std::size_t i = 0; i < v.size(); ++i) v[i] = atav[i] / n;
    }
    return est;
}

double min_entry(const Vec& v) {
    double m = v[0];
    for (double t : v) m = std::min(m, t);
    return m;
}

struct DrpoStats {
    std::uint64_t iterations = 0;
    std::uint64_t matvecs = 0;
};

struct RegObjective {
    const MatrixGame& game;
    const Vec& log_q;
    double lambda;
    DrpoStats* stats;

    // Value and gradient of f_{lambda,q}; also exposes the softmax response.
    double value_grad(const Vec& x, Vec& grad, Vec& y_resp) const {
        Vec theta;
        kernels::gemv_t(game.A, x, theta);
        if (stats) ++stats->matvecs;
        for (std::size_t i = 0; i < theta.size(); ++i)
            theta[i] = theta[i] / lambda + log_q[i];
        const double lse = kernels::softmax(theta, y_resp);
        kernels::gemv(game.A, y_resp, grad);
        if (stats) ++stats->matvecs;
        return lambda * lse;
    }

    double value(const Vec& x) const {
        Vec theta;
        kernels::gemv_t(game.A, x, theta);
        if (stats) ++stats->matvecs;
        for (std::size_t i = 0; i < theta.size(); ++i)
            theta[i] = theta[i] / lambda + log_q[i];
        return lambda * kernels::logsumexp(theta);
    }

    // Certified gap at x via the response pair: f(x) - phi_lambda(y_resp)
    // telescopes to x^T A y_resp minus the exact inner minimum over X.
    double gap(const Vec& x, const Vec& y_resp) const {
        Vec v;
        kernels::gemv(game.A, y_resp, v);
        if (stats) ++stats->matvecs;
        const double xv = kernels::dot(x, v);
        const double inner_min =
            game.primal_domain == PrimalDomain::Ball ? -kernels::nrm2(v) : min_entry(v);
        return xv - inner_min;
    }
};

Vec drpo_matgame_impl(const MatrixGame& game, const Vec& q, double lambda,
                      double eps_prime, DrpoStats* stats) {
    if (!(lambda > 0.0)) throw InvalidInputError("drpo_matgame: lambda must be positive");
    if (!(eps_prime > 0.0)) throw InvalidInputError("drpo_matgame: eps_prime must be positive");
    if (q.size() != game.n()) throw InvalidInputError("drpo_matgame: q dimension mismatch");
    Vec log_q(q.size());
    for (std::size_t i = 0; i < q.size(); ++i) {
        if (!(q[i] > 0.0)) throw InvalidInputError("drpo_matgame: q must be strictly positive");
        log_q[i] = std::log(q[i]);
    }

    RegObjective obj{game, log_q, lambda, stats};

    Vec x(game.d(), 0.0);
    if (game.primal_domain == PrimalDomain::Simplex)
        x.assign(game.d(), 1.0 / static_cast<double>(game.d()));

    double L = spectral_norm_sq(game.A, stats ? &stats->matvecs : nullptr) / lambda;
    L = std::max(L * 1.1, 1e-12);

    Vec grad, y_resp;
    double fx = obj.value_grad(x, grad, y_resp);
    Vec x_prev = x;
    double t = 1.0;
    constexpr std::uint64_t kMaxIter = 1'000'000;
    double best_gap = std::numeric_limits<double>::infinity();

    for (std::uint64_t iter = 0; iter < kMaxIter; ++iter) {
        if (stats) ++stats->iterations;
        const double g = obj.gap(x, y_resp);
        best_gap = std::min(best_gap, g);
        if (g <= eps_prime) return x;

        // FISTA extrapolation (collapses to plain descent right after restart).
        const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
        const double beta = (t - 1.0) / t_next;
        Vec yv(x.size());
        for (std::size_t i = 0; i < x.size(); ++i)
            yv[i] = x[i] + beta * (x[i] - x_prev[i]);

        Vec gy, y_resp_y;
        const double fy = obj.value_grad(yv, gy, y_resp_y);

        // Backtracking projected-gradient step from the extrapolated point.
        Vec xn(x.size());
        double fn = 0.0;
        for (;;) {
            for (std::size_t i = 0; i < x.size(); ++i) xn[i] = yv[i] - gy[i] / L;
            project_domain(game.primal_domain, xn);
            fn = obj.value(xn);
            double lin = fy, quad = 0.0;
            for (std::size_t i = 0; i < x.size(); ++i) {
                const double d = xn[i] - yv[i];
                lin += gy[i] * d;
                quad += d * d;
            }
            if (fn <= lin + 0.5 * L * quad + 1e-15 * std::abs(fn)) break;
            L *= 2.0;
            if (L > 1e300) throw ConvergenceError("drpo_matgame: backtracking diverged", g);
        }

        if (fn > fx) {
            // Monotone restart: drop momentum and step from the current best.
            t = 1.0;
            x_prev = x;
            Vec gx, rx;
            fx = obj.value_grad(x, gx, rx);
            for (std::size_t i = 0; i < x.size(); ++i) xn[i] = x[i] - gx[i] / L;
            project_domain(game.primal_domain, xn);
            fn = obj.value(xn);
            if (fn > fx) {
                // No descent even from a plain step; tighten L and continue.
                L *= 2.0;
                continue;
            }
        } else {
            t = t_next;
            x_prev = x;
        }
        x = xn;
        obj.value_grad(x, grad, y_resp);  // refresh the response for the gap check
        fx = fn;
    }
    throw ConvergenceError("drpo_matgame: iteration cap reached", best_gap);
}

}  // namespace

void MatrixGame::validate() const {
    if (A.rows == 0 || A.cols == 0) throw InvalidInputError("MatrixGame: empty matrix");
    if (primal_domain == PrimalDomain::Ball) {
        for (std::size_t j = 0; j < A.cols; ++j) {
            double s = 0.0;
            for (std::size_t i = 0; i < A.rows; ++i) s += A(i, j) * A(i, j);
            if (std::sqrt(s) > 1.0 + kNormSlack)
                throw InvalidInputError("MatrixGame: column " + std::to_string(j) +
                                        " has l2 norm > 1 (ball variant)");
        }
    } else {
        for (double v : A.data)
            if (std::abs(v) > 1.0 + kNormSlack)
                throw InvalidInputError("MatrixGame: entry exceeds 1 (simplex variant)");
    }
}

Matrix MatrixGame::load_csv(const std::string& path, bool has_header) {
    std::ifstream in(path);
    if (!in) throw InvalidInputError("load_csv: cannot open " + path);
    std::vector<Vec> rows;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (first && has_header) {
            first = false;
            continue;
        }
        first = false;
        Vec row;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
        if (!rows.empty() && row.size() != rows.front().size())
            throw InvalidInputError("load_csv: ragged rows in " + path);
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw InvalidInputError("load_csv: no data in " + path);
    Matrix A(rows.size(), rows.front().size());
    for (std::size_t i = 0; i < A.rows; ++i)
        for (std::size_t j = 0; j < A.cols; ++j) A(i, j) = rows[i][j];
    return A;
}

void MatrixGame::save_csv(const Matrix& A, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw InvalidInputError("save_csv: cannot open " + path);
    out.precision(17);
    for (std::size_t i = 0; i < A.rows; ++i) {
        for (std::size_t j = 0; j < A.cols; ++j)
            out << A(i, j) << (j + 1 == A.cols ? '\n' : ',');
    }
}

Matrix MatrixGame::load_binary(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InvalidInputError("load_binary: cannot open " + path);
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, "DXMG", 4) != 0)
        throw InvalidInputError("load_binary: bad magic in " + path);
    std::uint64_t d = 0, n = 0;
    in.read(reinterpret_cast<char*>(&d), 8);
    in.read(reinterpret_cast<char*>(&n), 8);
    if (!in || d == 0 || n == 0 || d * n > (1ull << 32))
        throw InvalidInputError("load_binary: bad dimensions in " + path);
    Matrix A(d, n);
    in.read(reinterpret_cast<char*>(A.data.data()),
            static_cast<std::streamsize>(d * n * sizeof(double)));
    if (!in) throw InvalidInputError("load_binary: truncated file " + path);
    return A;
}

void MatrixGame::save_binary(const Matrix& A, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InvalidInputError("save_binary: cannot open " + path);
    out.write("DXMG", 4);
    const std::uint64_t d = A.rows, n = A.cols;
    out.write(reinterpret_cast<const char*>(&d), 8);
    out.write(reinterpret_cast<const char*>(&n), 8);
    out.write(reinterpret_cast<const char*>(A.data.data()),
              static_cast<std::streamsize>(d * n * sizeof(double)));
}

double primal_value(const MatrixGame& game, const Vec& x) {
    if (!feasible(game.primal_domain, x))
        throw InvalidInputError("primal_value: x outside the primal domain");
    Vec atx;
    kernels::gemv_t(game.A, x, atx);
    double m = atx[0];
    for (double v : atx) m = std::max(m, v);
    return m;
}

double dual_value(const MatrixGame& game, const Vec& y) {
    if (y.size() != game.n()) throw InvalidInputError("dual_value: y dimension mismatch");
    double s = 0.0;
    for (double v : y) {
        if (v < -1e-12) throw InvalidInputError("dual_value: y has negative coordinates");
        s += v;
    }
    if (std::abs(s - 1.0) > 1e-9) throw InvalidInputError("dual_value: y not on the simplex");
    Vec ay;
    kernels::gemv(game.A, y, ay);
    if (game.primal_domain == PrimalDomain::Ball) return -kernels::nrm2(ay);
    return min_entry(ay);
}

double regularized_primal_value(const MatrixGame& game, const Vec& x, const Vec& q,
                                double lambda) {
    if (!(lambda > 0.0))
        throw InvalidInputError("regularized_primal_value: lambda must be positive");
    Vec theta;
    kernels::gemv_t(game.A, x, theta);
    for (std::size_t i = 0; i < theta.size(); ++i) {
        if (!(q[i] > 0.0))
            throw InvalidInputError("regularized_primal_value: q must be strictly positive");
        theta[i] = theta[i] / lambda + std::log(q[i]);
    }
    return lambda * kernels::logsumexp(theta);
}

Vec drpo_matgame(const MatrixGame& game, const Vec& q, double lambda, double eps_prime) {
    return drpo_matgame_impl(game, q, lambda, eps_prime, nullptr);
}

Vec drbr_matgame(const Vec& q, double Lambda, const Vec& Atx) {
    if (!(Lambda > 0.0)) throw InvalidInputError("drbr_matgame: Lambda must be positive");
    if (q.size() != Atx.size()) throw InvalidInputError("drbr_matgame: length mismatch");
    Vec theta(q.size());
    for (std::size_t i = 0; i < q.size(); ++i) {
        if (!(q[i] > 0.0)) throw InvalidInputError("drbr_matgame: q must be strictly positive");
        theta[i] = std::log(q[i]) + Atx[i] / Lambda;
    }
    return softmax_point(theta);
}

MatGameDualResult solve_dual_matgame(const MatrixGame& game, double eps,
                                     std::mt19937_64& rng, bool store_rounds) {
    (void)rng;  // the DRPO realization is deterministic
    game.validate();
    if (!(eps > 0.0)) throw InvalidInputError("solve_dual_matgame: eps must be positive");

    MatGameDualResult res;
    if (game.n() == 1) {
        res.y = {1.0};
        res.duality_gap_certificate = 0.0;
        return res;
    }

    const double ln_n = std::log(static_cast<double>(game.n()));
    const Schedule sched = schedule_log_rounds(eps, ln_n, 1.0, 1.0);
    res.K_used = sched.K;

    DrpoStats stats;
    double best_primal = std::numeric_limits<double>::infinity();

    OracleSuite oracles;
    oracles.drpo = [&](const Vec& q, double lambda, double eps_prime, std::mt19937_64&) {
        Vec x = drpo_matgame_impl(game, q, lambda, eps_prime, &stats);
        best_primal = std::min(best_primal, primal_value(game, x));
        return x;
    };
    oracles.drbr = [&](const Vec& q, double Lambda, const Vec& x) {
        Vec atx;
        kernels::gemv_t(game.A, x, atx);
        ++stats.matvecs;
        return drbr_matgame(q, Lambda, atx);
    };

    const Vec y0(game.n(), 1.0 / static_cast<double>(game.n()));
    std::mt19937_64 dummy(0);
    ExtractionResult ex =
        run_dual_extraction(entropy_simplex_setup(game.n()), oracles, y0, sched, dummy,
                            store_rounds);

    res.y = ex.y_final;
    res.duality_gap_certificate = best_primal - dual_value(game, res.y);
    res.matvec_count = stats.matvecs;
    res.drpo_iterations = stats.iterations;
    if (store_rounds) res.rounds = std::move(ex.rounds);
    return res;
}

Vec solve_primal_simplex_matgame(const MatrixGame& game, double eps, std::mt19937_64& rng) {
    if (game.primal_domain != PrimalDomain::Simplex)
        throw InvalidInputError(
            "solve_primal_simplex_matgame: only the simplex variant supports the "
            "negated-transpose reduction");
    game.validate();
    if (game.d() == 1) return {1.0};
    MatrixGame neg;
    neg.primal_domain = PrimalDomain::Simplex;
    neg.A = Matrix(game.n(), game.d());
    for (std::size_t i = 0; i < game.d(); ++i)
        for (std::size_t j = 0; j < game.n(); ++j) neg.A(j, i) = -game.A(i, j);
    return solve_dual_matgame(neg, eps, rng).y;
}

}  // namespace dualex
