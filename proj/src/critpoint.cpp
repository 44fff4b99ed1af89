#include "dualex/critpoint.hpp"

#include <cmath>
#include <limits>

#include "dualex/kernels.hpp"

namespace dualex {

void CritConfig::validate(double beta) const {
    if (x0.empty()) throw InvalidInputError("CritConfig: x0 is empty");
    if (!(Delta > 0.0)) throw InvalidInputError("CritConfig: Delta must be positive");
    const double cap = std::sqrt(2.0 * beta * Delta);
    if (!(gamma > 0.0) || !(gamma < cap))
        throw InvalidInputError("CritConfig: gamma must lie in (0, sqrt(2 beta Delta))");
}

SmoothFnOracle build_regularized(const SmoothFnOracle& h, const CritConfig& cfg) {
    const double alpha = cfg.gamma * cfg.gamma / (8.0 * cfg.Delta);
    SmoothFnOracle f;
    f.beta = h.beta + alpha;
    f.strong_convexity = h.strong_convexity + alpha;
    f.query_counter = h.query_counter;  // one f-gradient == one h-gradient
    const Vec x0 = cfg.x0;
    f.value_fn = [h_value = h.value_fn, x0, alpha](const Vec& x) {
        double q = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double d = x[i] - x0[i];
            q += d * d;
        }
        return h_value(x) + 0.5 * alpha * q;
    };
    f.grad_fn = [h_grad = h.grad_fn, x0, alpha](const Vec& x) {
        Vec g = h_grad(x);
        for (std::size_t i = 0; i < g.size(); ++i) g[i] += alpha * (x[i] - x0[i]);
        return g;
    };
    return f;
}

namespace {
void project_ball_at(const Vec& w, double zeta, Vec& x) {
    double d2 = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double t = x[i] - w[i];
        d2 += t * t;
    }
    const double d = std::sqrt(d2);
    if (d > zeta)
        for (std::size_t i = 0; i < x.size(); ++i)
            x[i] = w[i] + (x[i] - w[i]) * (zeta / d);
}
}  // namespace

Vec cgm(const SmoothFnOracle& f, double zeta, const Vec& w, double eps, double c_budget) {
    if (!(zeta > 0.0) || !(eps > 0.0))
        throw InvalidInputError("cgm: zeta and eps must be positive");
    const std::uint64_t budget = static_cast<std::uint64_t>(
        std::ceil(c_budget * (1.0 + std::sqrt(f.beta * zeta * zeta / eps))));
    const std::uint64_t start_queries = f.queries();

    double L = f.beta;
    Vec x = w;
    double fx = f.value(x);
    Vec y = x, x_prev = x;
    double t = 1.0;
    Vec best;
    double best_cert = std::numeric_limits<double>::infinity();

    while (f.queries() - start_queries < budget) {
        const Vec g = f.grad(y);
        const double fy = f.value(y);

        // Backtracking projected-gradient step plus the gap certificate at y.
        Vec y_plus(y.size());
        double f_plus = 0.0;
        for (;;) {
            for (std::size_t i = 0; i < y.size(); ++i) y_plus[i] = y[i] - g[i] / L;
            project_ball_at(w, zeta, y_plus);
            f_plus = f.value(y_plus);
            double lin = fy, quad = 0.0;
            for (std::size_t i = 0; i < y.size(); ++i) {
                const double d = y_plus[i] - y[i];
                lin += g[i] * d;
                quad += d * d;
            }
            if (f_plus <= lin + 0.5 * L * quad + 1e-15 * std::abs(f_plus)) break;
            L *= 2.0;
            if (L > 1e300) throw ConvergenceError("cgm: backtracking diverged", best_cert);
        }
        double gn = 0.0;
        for (std::size_t i = 0; i < y.size(); ++i) {
            const double m = L * (y[i] - y_plus[i]);
            gn += m * m;
        }
        gn = std::sqrt(gn);
        double cert = (zeta + gn / L) * gn;  // gradient-mapping gap bound
        if (f.strong_convexity > 0.0)
            cert = std::min(cert, gn * gn / (2.0 * f.strong_convexity));
        if (cert < best_cert) {
            best_cert = cert;
            best = y_plus;
        }
        if (cert <= eps) return y_plus;

        if (f_plus > fx) {
            // Monotone restart: kill the momentum, step again from x.
            y = x;
            x_prev = x;
            t = 1.0;
            continue;
        }
        const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
        const double beta_m = (t - 1.0) / t_next;
        x_prev = x;
        x = y_plus;
        fx = f_plus;
        for (std::size_t i = 0; i < y.size(); ++i)
            y[i] = x[i] + beta_m * (x[i] - x_prev[i]);
        project_ball_at(w, zeta, y);
        t = t_next;
    }
    throw ConvergenceError("cgm: query budget exhausted", best_cert);
}

CritResult find_critical_point(const SmoothFnOracle& h, const CritConfig& cfg,
                               double cgm_budget) {
    cfg.validate(h.beta);
    const SmoothFnOracle f = build_regularized(h, cfg);
    const double R = cfg.R();
    const double K_real =
        std::log(48.0 * std::sqrt(h.beta * cfg.Delta) / cfg.gamma) / std::log(1.5);
    const std::size_t K = static_cast<std::size_t>(std::ceil(std::max(K_real, 1.0))) + 2;

    const std::uint64_t start_queries = h.queries();
    CritResult res;
    res.z_seq.push_back(cfg.x0);
    Vec weighted_sum(cfg.x0.size(), 0.0);  // sum_j lambda_j z_j
    double Lambda = 0.0;

    for (std::size_t k = 1; k <= K; ++k) {
        const double lambda = std::ldexp(1.0, static_cast<int>(k - 1)) / 32.0;
        const Vec& z_prev = res.z_seq.back();
        for (std::size_t i = 0; i < weighted_sum.size(); ++i)
            weighted_sum[i] += lambda * z_prev[i];
        Lambda += lambda;

        Vec w(cfg.x0.size());
        for (std::size_t i = 0; i < w.size(); ++i)
            w[i] = (cfg.x0[i] + weighted_sum[i]) / (1.0 + Lambda);
        const double zeta = R / (1.0 + Lambda);
        const double eps_k = cfg.Delta / (64.0 * std::pow(1.5, static_cast<double>(k)));
        const double eps_cgm = eps_k / (1.0 + Lambda);

        const std::uint64_t before = h.queries();
        Vec z_k;
        try {
            z_k = cgm(f, zeta, w, eps_cgm, cgm_budget);
        } catch (const std::exception& e) {
            throw std::runtime_error("find_critical_point round " + std::to_string(k) +
                                     ": " + e.what());
        }
        res.rounds.push_back({k, zeta, eps_cgm, h.queries() - before});
        res.z_seq.push_back(std::move(z_k));
    }

    res.z = res.z_seq.back();
    res.grad_norm = kernels::nrm2(h.grad(res.z));
    res.queries = h.queries() - start_queries;
    return res;
}

Vec fenchel_drbr(const std::function<Vec(const Vec&)>& g_grad,
                 const std::function<Vec(const Vec&)>& g_conj_grad, const Vec& q,
                 double lambda, const Vec& x) {
    if (!(lambda >= 0.0)) throw InvalidInputError("fenchel_drbr: lambda must be >= 0");
    if (lambda == 0.0) return g_grad(x);  // unregularized limit
    const Vec cq = g_conj_grad(q);
    if (cq.size() != x.size()) throw InvalidInputError("fenchel_drbr: dimension mismatch");
    Vec mix(x.size());
    for (std::size_t i = 0; i < x.size(); ++i)
        mix[i] = (x[i] + lambda * cq[i]) / (1.0 + lambda);
    return g_grad(mix);
}

bool verify_dual_norm_bound(const Vec& y, double eps, const CritConfig& cfg) {
    if (eps < 0.0) throw InvalidInputError("verify_dual_norm_bound: eps must be >= 0");
    return kernels::nrm2(y) <= eps * cfg.gamma / cfg.Delta + 1e-9;
}

}  // namespace dualex
