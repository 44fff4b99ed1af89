#include "dualex/cvar.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <memory>
#include <sstream>

#include "dualex/kernels.hpp"
#include "dualex/setups.hpp"

namespace dualex {

double CvarDomain::diameter() const {
    if (kind == Kind::Ball) return 2.0 * radius;
    double s = 0.0;
    for (std::size_t i = 0; i < lo.size(); ++i) {
        const double d = hi[i] - lo[i];
        s += d * d;
    }
    return std::sqrt(s);
}

void CvarDomain::project(Vec& x) const {
    if (kind == Kind::Ball) {
        double d2 = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double t = x[i] - center[i];
            d2 += t * t;
        }
        const double d = std::sqrt(d2);
        if (d > radius)
            for (std::size_t i = 0; i < x.size(); ++i)
                x[i] = center[i] + (x[i] - center[i]) * (radius / d);
    } else {
        for (std::size_t i = 0; i < x.size(); ++i)
            x[i] = std::min(std::max(x[i], lo[i]), hi[i]);
    }
}

Vec CvarDomain::some_point() const {
    if (kind == Kind::Ball) return center;
    Vec p(lo.size());
    for (std::size_t i = 0; i < lo.size(); ++i) p[i] = 0.5 * (lo[i] + hi[i]);
    return p;
}

void CvarProblem::validate() const {
    if (n == 0 || dim == 0) throw InvalidInputError("CvarProblem: empty problem");
    if (!loss) throw InvalidInputError("CvarProblem: missing loss oracle");
    const double nn = static_cast<double>(n);
    if (alpha < 1.0 / nn - 1e-12 || alpha > 1.0 + 1e-12)
        throw InvalidInputError("CvarProblem: alpha must lie in [1/n, 1]");
    if (!(M > 0.0) || !(G > 0.0)) throw InvalidInputError("CvarProblem: need M, G > 0");
    if (!(eps > 0.0) || eps >= 4.0 * M)
        throw InvalidInputError("CvarProblem: eps must lie in (0, 4M)");
    if (nn * lo() > 1.0 + 1e-12 || nn * hi() < 1.0 - 1e-12)
        throw InvalidInputError("CvarProblem: truncated simplex is empty");
}

std::pair<double, Vec> CvarProblem::query(std::size_t i, const Vec& x) const {
    ++query_count;
    return loss(i, x);
}

CvarProblem CvarProblem::from_affine(AffineLosses losses, CvarDomain domain, double alpha,
                                     double M, double G, double eps) {
    CvarProblem p;
    p.n = losses.a.rows;
    p.dim = losses.a.cols;
    p.domain = std::move(domain);
    p.alpha = alpha;
    p.M = M;
    p.G = G;
    p.eps = eps;
    auto data = std::make_shared<AffineLosses>(std::move(losses));
    p.affine = *data;
    p.loss = [data](std::size_t i, const Vec& x) {
        const std::size_t d = data->a.cols;
        Vec g(d);
        double v = data->b[i];
        for (std::size_t j = 0; j < d; ++j) {
            g[j] = data->a(i, j);
            v += g[j] * x[j];
        }
        return std::make_pair(v, std::move(g));
    };
    return p;
}

AffineLosses CvarProblem::load_affine_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidInputError("load_affine_csv: cannot open " + path);
    std::vector<Vec> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        Vec row;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
        if (row.size() < 2) throw InvalidInputError("load_affine_csv: row needs b,a1..ad");
        if (!rows.empty() && row.size() != rows.front().size())
            throw InvalidInputError("load_affine_csv: ragged rows");
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw InvalidInputError("load_affine_csv: no data");
    AffineLosses al;
    al.a = Matrix(rows.size(), rows.front().size() - 1);
    al.b.resize(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        al.b[i] = rows[i][0];
        for (std::size_t j = 0; j + 1 < rows[i].size(); ++j) al.a(i, j) = rows[i][j + 1];
    }
    return al;
}

Vec truncated_entropic_response(const Vec& v, double lambda, const Vec& q, double lo,
                                double hi) {
    const std::size_t n = v.size();
    if (n == 0 || q.size() != n)
        throw InvalidInputError("truncated_entropic_response: bad lengths");
    if (!(lambda > 0.0))
        throw InvalidInputError("truncated_entropic_response: lambda must be positive");
    const double nn = static_cast<double>(n);
    if (lo < 0.0 || lo > hi || nn * lo > 1.0 + 1e-12 || nn * hi < 1.0 - 1e-12)
        throw InvalidInputError("truncated_entropic_response: infeasible box");

    // y_i(mu) = clip(q_i exp(v_i/lambda - 1 - mu/lambda), lo, hi); in log form
    // u_i = (v_i - mu)/lambda + ln q_i - 1 compared against ln lo / ln hi.
    Vec t(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (!(q[i] > 0.0))
            throw InvalidInputError("truncated_entropic_response: q must be positive");
        t[i] = v[i] + lambda * (std::log(q[i]) - 1.0);
    }
    const double ln_hi = std::log(hi);
    const double ln_lo = lo > 0.0 ? std::log(lo) : -std::numeric_limits<double>::infinity();

    Vec y(n);
    auto mass = [&](double mu) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double u = (t[i] - mu) / lambda;
            y[i] = u >= ln_hi ? hi : (u <= ln_lo ? lo : std::exp(u));
            s += y[i];
        }
        return s;
    };

    double t_min = t[0], t_max = t[0];
    for (double ti : t) {
        t_min = std::min(t_min, ti);
        t_max = std::max(t_max, ti);
    }
    double mu_left = t_min - lambda * ln_hi;             // all coordinates at hi
    double mu_right = lo > 0.0 ? t_max - lambda * ln_lo  // all coordinates at lo
                               : t_max + lambda * (std::log(nn) + 1.0);
    if (mu_right < mu_left) std::swap(mu_left, mu_right);

    // Below the summation noise floor nothing converges: n additions of
    // ~1/n-sized terms carry O(n eps_machine) rounding error.
    const double sum_tol = std::max(1e-12, 4e-16 * nn);
    double mu = 0.5 * (mu_left + mu_right), s = mass(mu);
    int iter = 0;
    for (; iter < 200 && std::abs(s - 1.0) > 0.1 * sum_tol; ++iter) {
        if (s > 1.0)
            mu_left = mu;
        else
            mu_right = mu;
        mu = 0.5 * (mu_left + mu_right);
        s = mass(mu);
    }
    // Newton polish on the (monotone) mass function.
    for (int p = 0; p < 5 && std::abs(s - 1.0) > 0.0; ++p) {
        double ds = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            if (y[i] > lo && y[i] < hi) ds -= y[i] / lambda;
        if (ds == 0.0) break;
        const double mu_new = mu - (s - 1.0) / ds;
        if (!(mu_new > mu_left && mu_new < mu_right)) break;
        const double s_new = mass(mu_new);
        if (std::abs(s_new - 1.0) >= std::abs(s - 1.0)) {
            s = mass(mu);  // restore y to the better mu
            break;
        }
        mu = mu_new;
        s = s_new;
    }
    if (std::abs(s - 1.0) > sum_tol)
        throw std::runtime_error("truncated_entropic_response: root-finder failed");
    return y;
}

namespace {

// Best response of a sampled batch: weights over the batch's own truncated
// simplex (box scales with the batch size), then the weighted subgradient.
Vec batch_weighted_grad(const CvarProblem& prob, const std::vector<double>& values,
                        const std::vector<Vec>& grads, double lambda) {
    const std::size_t m = values.size();
    const double mm = static_cast<double>(m);
    const Vec uniform(m, 1.0 / mm);
    Vec v(values.begin(), values.end());
    const Vec w = truncated_entropic_response(v, lambda, uniform,
                                              prob.eps / (4.0 * prob.M * mm),
                                              1.0 / (prob.alpha * mm));
    Vec g(prob.dim, 0.0);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < prob.dim; ++j) g[j] += w[i] * grads[i][j];
    return g;
}

}  // namespace

Vec mlmc_gradient(const CvarProblem& problem, const Vec& x, const Vec& q, double lambda,
                  std::uint64_t n_prime, std::mt19937_64& rng) {
    if (n_prime < 2 || (n_prime & (n_prime - 1)) != 0)
        throw InvalidInputError("mlmc_gradient: n_prime must be a power of two >= 2");
    if (q.size() != problem.n) throw InvalidInputError("mlmc_gradient: q dimension mismatch");
    Vec log_q(q.size());
    for (std::size_t i = 0; i < q.size(); ++i) log_q[i] = std::log(q[i]);

    std::uniform_int_distribution<std::size_t> pick(0, problem.n - 1);
    // Shifted losses f_i + lambda ln q_i enter through the batch values; the
    // x-gradient of the shift is zero.
    auto draw_batch = [&](std::size_t m, std::vector<double>& values,
                          std::vector<Vec>& grads) {
        values.resize(m);
        grads.resize(m);
        for (std::size_t i = 0; i < m; ++i) {
            const std::size_t s = pick(rng);
            auto [fv, g] = problem.query(s, x);
            values[i] = fv + lambda * log_q[s];
            grads[i] = std::move(g);
        }
    };

    std::vector<double> values;
    std::vector<Vec> grads;
    draw_batch(2, values, grads);  // base level, n0 = 2
    Vec est = batch_weighted_grad(problem, values, grads, lambda);

    const int j_max = static_cast<int>(std::log2(static_cast<double>(n_prime))) - 1;
    if (j_max < 1) return est;

    // J = j with probability 2^{-j} / (1 - 2^{-j_max}), j in 1..j_max.
    const double z = 1.0 - std::ldexp(1.0, -j_max);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    double u = unif(rng) * z;
    int J = 1;
    double pj = 0.5;
    while (J < j_max && u > pj) {
        u -= pj;
        pj *= 0.5;
        ++J;
    }
    pj = std::ldexp(1.0, -J) / z;

    const std::size_t m = static_cast<std::size_t>(1) << (J + 1);  // n0 * 2^J
    draw_batch(m, values, grads);
    const Vec g_full = batch_weighted_grad(problem, values, grads, lambda);
    const std::vector<double> v1(values.begin(), values.begin() + m / 2);
    const std::vector<double> v2(values.begin() + m / 2, values.end());
    const std::vector<Vec> g1(grads.begin(), grads.begin() + m / 2);
    const std::vector<Vec> g2(grads.begin() + m / 2, grads.end());
    const Vec gh1 = batch_weighted_grad(problem, v1, g1, lambda);
    const Vec gh2 = batch_weighted_grad(problem, v2, g2, lambda);
    for (std::size_t j = 0; j < est.size(); ++j)
        est[j] += (g_full[j] - 0.5 * (gh1[j] + gh2[j])) / pj;
    return est;
}

std::uint64_t select_n_prime(const CvarProblem& problem, const Vec& q, double lambda,
                             double eps_prime, const CvarSolverConfig& cfg) {
    double max_log_inv_q = 0.0;
    for (double qi : q) max_log_inv_q = std::max(max_log_inv_q, std::log(1.0 / qi));
    const double m_prime = problem.M + lambda * max_log_inv_q;
    const double base =
        cfg.nprime_mult * m_prime * m_prime / (problem.alpha * eps_prime * eps_prime);
    // One fixed-point pass through the log factor.
    const double target = base * std::log2(2.0 + base);
    std::uint64_t np = 2;
    while (static_cast<double>(np) < target && np < cfg.n_prime_cap) np <<= 1;
    return np;
}

Vec drpo_cvar(const CvarProblem& problem, const Vec& q, double lambda, double eps_prime,
              std::mt19937_64& rng, const CvarSolverConfig& cfg) {
    if (!(lambda > 0.0) || !(eps_prime > 0.0))
        throw InvalidInputError("drpo_cvar: lambda and eps_prime must be positive");
    const double nn = static_cast<double>(problem.n);
    const double q_inv_cap = cfg.q_inv_cap_mult * nn * nn * problem.M / problem.eps;
    double max_inv_q = 0.0;
    for (double qi : q) {
        if (!(qi > 0.0)) throw InvalidInputError("drpo_cvar: q must be strictly positive");
        max_inv_q = std::max(max_inv_q, 1.0 / qi);
    }
    if (max_inv_q > q_inv_cap * (1.0 + 1e-9))
        throw InvalidInputError("drpo_cvar: center q violates the 1/q cap");
    const double lambda_cap = cfg.lambda_cap > 0.0 ? cfg.lambda_cap : 1e3 * problem.M;
    if (lambda > lambda_cap * (1.0 + 1e-9))
        throw InvalidInputError("drpo_cvar: lambda exceeds the configured cap");

    const std::uint64_t n_prime = select_n_prime(problem, q, lambda, eps_prime, cfg);
    const double log_np = std::max(std::log2(static_cast<double>(n_prime)), 1.0);
    const double sigma =
        std::sqrt(cfg.sigma_mult * problem.G * problem.G * log_np / problem.alpha);
    const double R = problem.R();

    // SGD aims at eps'/2 so the surrogate bias (<= eps'/4 by the n' rule)
    // stays inside the overall eps' contract.
    const double tgt = 0.5 * eps_prime;
    double t_real = cfg.sgd_iter_mult * (sigma * R / tgt) * (sigma * R / tgt);
    std::uint64_t T = static_cast<std::uint64_t>(std::ceil(std::max(t_real, 1.0)));
    T = std::min(T, cfg.sgd_iter_cap);
    const double step = R / (sigma * std::sqrt(static_cast<double>(T)));

    Vec x = problem.domain.some_point();
    Vec avg(x.size(), 0.0);
    for (std::uint64_t t = 0; t < T; ++t) {
        for (std::size_t j = 0; j < x.size(); ++j) avg[j] += x[j];
        const Vec g = mlmc_gradient(problem, x, q, lambda, n_prime, rng);
        for (std::size_t j = 0; j < x.size(); ++j) x[j] -= step * g[j];
        problem.domain.project(x);
    }
    for (std::size_t j = 0; j < avg.size(); ++j) avg[j] /= static_cast<double>(T);
    return avg;
}

double dual_value_cvar(const CvarProblem& problem, const Vec& y, double inner_tol) {
    if (y.size() != problem.n) throw InvalidInputError("dual_value_cvar: y dimension mismatch");
    if (problem.affine && problem.domain.kind == CvarDomain::Kind::Ball) {
        // min over the ball of <sum y_i a_i, x> + sum y_i b_i, in closed form.
        const AffineLosses& al = *problem.affine;
        Vec abar(problem.dim, 0.0);
        double bbar = 0.0;
        for (std::size_t i = 0; i < problem.n; ++i) {
            bbar += y[i] * al.b[i];
            for (std::size_t j = 0; j < problem.dim; ++j) abar[j] += y[i] * al.a(i, j);
        }
        return bbar + kernels::dot(abar, problem.domain.center) -
               problem.domain.radius * kernels::nrm2(abar);
    }
    if (!(inner_tol > 0.0)) throw InvalidInputError("dual_value_cvar: inner_tol must be positive");

    // Projected subgradient on the y-weighted loss: G R / sqrt(T) <= tol.
    const double R = problem.R();
    const double T_real = (problem.G * R / inner_tol) * (problem.G * R / inner_tol);
    const std::uint64_t T = static_cast<std::uint64_t>(std::ceil(std::max(T_real, 1.0)));
    const double step = R / (problem.G * std::sqrt(static_cast<double>(T)));
    Vec x = problem.domain.some_point();
    Vec avg(x.size(), 0.0);
    for (std::uint64_t t = 0; t < T; ++t) {
        for (std::size_t j = 0; j < x.size(); ++j) avg[j] += x[j];
        Vec g(x.size(), 0.0);
        for (std::size_t i = 0; i < problem.n; ++i) {
            if (y[i] == 0.0) continue;
            auto [fv, gi] = problem.query(i, x);
            (void)fv;
            for (std::size_t j = 0; j < x.size(); ++j) g[j] += y[i] * gi[j];
        }
        for (std::size_t j = 0; j < x.size(); ++j) x[j] -= step * g[j];
        problem.domain.project(x);
    }
    for (std::size_t j = 0; j < avg.size(); ++j) avg[j] /= static_cast<double>(T);
    double val = 0.0;
    for (std::size_t i = 0; i < problem.n; ++i) {
        if (y[i] == 0.0) continue;
        val += y[i] * problem.query(i, avg).first;
    }
    return val;
}

CvarDualResult solve_dual_cvar(const CvarProblem& problem, std::mt19937_64& rng,
                               const CvarSolverConfig& cfg) {
    problem.validate();
    const std::uint64_t q_before = problem.query_count;
    CvarDualResult res;
    if (problem.n == 1) {
        res.y = {1.0};
        return res;
    }

    const double nn = static_cast<double>(problem.n);
    const Schedule sched =
        schedule_log_rounds(problem.eps / 2.0, std::log(nn), problem.M, 1.0);
    const double lo = problem.lo(), hi = problem.hi();
    const DgfSetup setup = truncated_simplex_setup(problem.n, lo, hi);

    CvarSolverConfig run_cfg = cfg;
    if (run_cfg.lambda_cap <= 0.0) run_cfg.lambda_cap = sched.cumulative(sched.K);

    OracleSuite oracles;
    oracles.drpo = [&](const Vec& q, double lambda, double eps_prime, std::mt19937_64& r) {
        // The geometric-mean aggregation keeps q well inside the simplex.
        for (double qi : q)
            if (1.0 / qi > nn / lo * (1.0 + 1e-9))
                throw DomainError("solve_dual_cvar: aggregation center left its bound");
        return drpo_cvar(problem, q, lambda, eps_prime, r, run_cfg);
    };
    oracles.drbr = [&](const Vec& q, double Lambda, const Vec& x) {
        Vec v(problem.n);
        for (std::size_t i = 0; i < problem.n; ++i) v[i] = problem.query(i, x).first;
        return truncated_entropic_response(v, Lambda, q, lo, hi);
    };

    const Vec y0(problem.n, 1.0 / nn);
    const ExtractionResult ex =
        run_dual_extraction(setup, oracles, y0, sched, rng, /*store_full=*/false);

    res.y = ex.y_final;
    res.certified_budget = ex.certified_divergence_budget;
    res.queries = problem.query_count - q_before;
    res.rounds = sched.K;
    return res;
}

}  // namespace dualex
