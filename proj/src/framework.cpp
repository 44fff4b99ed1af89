#include "dualex/framework.hpp"

#include <cmath>
#include <utility>

#include "dualex/kernels.hpp"

namespace dualex {

void Schedule::validate() const {
    if (K == 0) throw InvalidInputError("Schedule: K must be positive");
    if (lambdas.size() != K || eps_primal.size() != K)
        throw InvalidInputError("Schedule: lists must have exactly K entries");
    for (double l : lambdas)
        if (!(l > 0.0)) throw InvalidInputError("Schedule: lambdas must be positive");
    for (double e : eps_primal)
        if (!(e > 0.0)) throw InvalidInputError("Schedule: eps_primal must be positive");
}

double Schedule::cumulative(std::size_t k) const {
    double s = 0.0;
    for (std::size_t j = 0; j < k && j < lambdas.size(); ++j) s += lambdas[j];
    return s;
}

Schedule schedule_log_rounds(double eps, double B, double L, double mu_r) {
    if (!(eps > 0.0) || !(B > 0.0) || !(L > 0.0) || !(mu_r > 0.0))
        throw InvalidInputError("schedule_log_rounds: all arguments must be positive");
    const double inner = std::log2(L * L * B / (mu_r * eps * eps));
    const std::size_t K = static_cast<std::size_t>(std::ceil(std::max(inner, 1.0))) + 10;
    Schedule s;
    s.K = K;
    s.lambdas.resize(K);
    s.eps_primal.assign(K, eps / (4.0 * static_cast<double>(K)));
    for (std::size_t k = 0; k < K; ++k)
        s.lambdas[k] = std::ldexp(eps / (4.0 * B), static_cast<int>(k));
    return s;
}

Schedule schedule_geometric_accuracy(double eps, double B, std::size_t K) {
    if (!(eps > 0.0) || !(B > 0.0) || K == 0)
        throw InvalidInputError("schedule_geometric_accuracy: arguments must be positive");
    Schedule s;
    s.K = K;
    s.lambdas.resize(K);
    s.eps_primal.resize(K);
    for (std::size_t k = 0; k < K; ++k)
        s.lambdas[k] = std::ldexp(eps / (4.0 * B), static_cast<int>(k));
    for (std::size_t k = 1; k <= K; ++k)
        s.eps_primal[k - 1] = eps / (8.0 * std::pow(1.5, static_cast<double>(k)));
    return s;
}

Vec aggregate_center(const DgfSetup& setup, const std::vector<Vec>& centers,
                     const Vec& weights) {
    if (centers.empty() || centers.size() != weights.size())
        throw InvalidInputError("aggregate_center: bad list lengths");
    double total = 0.0;
    for (double w : weights) {
        if (!(w > 0.0)) throw InvalidInputError("aggregate_center: weights must be positive");
        total += w;
    }
    Vec acc(setup.dim_dual, 0.0);
    for (std::size_t j = 0; j < centers.size(); ++j) {
        if (centers[j].size() != setup.dim_dual)
            throw InvalidInputError("aggregate_center: dimension mismatch");
        Vec g = setup.r_grad(centers[j]);
        const double w = weights[j] / total;
        for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += w * g[i];
    }
    return setup.conjugate_grad_on_U(acc);
}

namespace {
void check_interior(const DgfSetup& setup, const Vec& p, std::size_t round,
                    const char* what) {
    if (setup.feasible_set == FeasibleSet::Simplex ||
        setup.feasible_set == FeasibleSet::TruncatedSimplex) {
        for (double v : p)
            if (!(v > 0.0))
                throw DomainError(std::string(what) + " left the simplex interior at round " +
                                  std::to_string(round));
    }
}
}  // namespace

ExtractionResult run_dual_extraction(const DgfSetup& setup, const OracleSuite& oracles,
                                     const Vec& y0, const Schedule& schedule,
                                     std::mt19937_64& rng, bool store_full) {
    schedule.validate();
    if (y0.size() != setup.dim_dual)
        throw InvalidInputError("run_dual_extraction: y0 dimension mismatch");
    if (!oracles.drpo || !oracles.drbr)
        throw InvalidInputError("run_dual_extraction: missing oracle");

    ExtractionResult res;
    std::vector<Vec> ys;
    ys.reserve(schedule.K + 1);
    ys.push_back(y0);
    res.rounds.reserve(schedule.K);

    double Lambda = 0.0;
    Vec weights;
    weights.reserve(schedule.K);
    for (std::size_t k = 1; k <= schedule.K; ++k) {
        Lambda += schedule.lambdas[k - 1];
        weights.push_back(schedule.lambdas[k - 1]);
        const double eps_k = schedule.eps_primal[k - 1];

        Vec q, x, y;
        try {
            q = aggregate_center(setup, ys, weights);
            check_interior(setup, q, k, "aggregate center");
            x = oracles.drpo(q, Lambda, eps_k, rng);
            ++res.drpo_calls;
            y = oracles.drbr(q, Lambda, x);
            ++res.drbr_calls;
            check_interior(setup, y, k, "best response");
        } catch (const std::exception& e) {
            throw std::runtime_error("round " + std::to_string(k) + ": " + e.what());
        }

        RoundRecord rec;
        rec.k = k;
        rec.Lambda = Lambda;
        rec.eps_primal = eps_k;
        rec.q_norm = kernels::nrm2(q);
        rec.x_norm = kernels::nrm2(x);
        rec.y_norm = kernels::nrm2(y);
        if (store_full) {
            rec.q = q;
            rec.x = std::move(x);
            rec.y = y;
        }
        res.rounds.push_back(std::move(rec));
        ys.push_back(std::move(y));
    }

    res.y_final = ys.back();
    res.certified_divergence_budget = schedule.eps_primal.back() / Lambda;
    return res;
}

std::size_t boost_call_count(double p, double delta) {
    if (!(p > 0.0) || !(p < 1.0) || !(delta > 0.0) || !(delta <= p))
        throw InvalidInputError("boost_call_count: need 0 < delta <= p < 1");
    return static_cast<std::size_t>(std::ceil(std::log2(1.0 / delta) / std::log2(1.0 / p)));
}

std::function<Vec(const Vec&, double, double, std::mt19937_64&)> boost_success_probability(
    std::function<Vec(const Vec&, double, double, std::mt19937_64&)> drposp, double p,
    double delta, std::function<double(const Vec& x, const Vec& q, double lambda)> f_eval) {
    const std::size_t N = boost_call_count(p, delta);
    if (!drposp || !f_eval)
        throw InvalidInputError("boost_success_probability: missing callable");
    return [drposp = std::move(drposp), f_eval = std::move(f_eval), N](
               const Vec& q, double lambda, double eps_prime, std::mt19937_64& rng) {
        Vec best;
        double best_val = 0.0;
        for (std::size_t i = 0; i < N; ++i) {
            Vec x = drposp(q, lambda, eps_prime, rng);
            const double v = f_eval(x, q, lambda);
            if (best.empty() || v < best_val) {
                best = std::move(x);
                best_val = v;
            }
        }
        return best;
    };
}

}  // namespace dualex
