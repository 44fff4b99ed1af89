#include "dualex/setups.hpp"

#include <atomic>
#include <cmath>

#include "dualex/kernels.hpp"

namespace dualex {

namespace {

std::atomic<std::uint64_t> g_clamp_count{0};

// Coordinates this small are "zero" for the 0 ln 0 convention.
constexpr double kZeroFloor = 1e-300;

// Keep simplex points strictly interior in finite precision.
void floor_and_renormalize(Vec& p) {
    bool clamped = false;
    for (double& v : p)
        if (v < kZeroFloor) {
            v = kZeroFloor;
            clamped = true;
        }
    if (!clamped) return;
    ++g_clamp_count;
    double s = 0.0;
    for (double v : p) s += v;
    for (double& v : p) v /= s;
}

double neg_entropy(const Vec& u) {
    double s = 0.0;
    for (double v : u)
        if (v >= kZeroFloor) s += v * std::log(v);
    return s;
}

}  // namespace

std::uint64_t simplex_clamp_count() { return g_clamp_count.load(); }
void reset_simplex_clamp_count() { g_clamp_count.store(0); }

double log_sum_exp(const Vec& theta) { return kernels::logsumexp(theta); }

Vec softmax_point(const Vec& theta) {
    Vec out;
    kernels::softmax(theta, out);
    floor_and_renormalize(out);
    return out;
}

double kl_divergence(const Vec& u, const Vec& w) {
    if (u.size() != w.size()) throw InvalidInputError("kl_divergence: length mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        if (w[i] < kZeroFloor) continue;  // 0 ln 0 = 0
        if (u[i] < kZeroFloor)
            throw DomainError("kl_divergence: center has a zero coordinate");
        s += w[i] * std::log(w[i] / u[i]);
    }
    return s < 0.0 ? 0.0 : s;  // round-off can make the exact 0 slightly negative
}

Vec weighted_geometric_center(const std::vector<Vec>& ys, const Vec& lambdas) {
    if (ys.empty() || ys.size() != lambdas.size())
        throw InvalidInputError("weighted_geometric_center: bad list lengths");
    const std::size_t n = ys[0].size();
    double total = 0.0;
    for (double l : lambdas) {
        if (l <= 0.0) throw InvalidInputError("weighted_geometric_center: nonpositive weight");
        total += l;
    }
    Vec theta(n, 0.0);
    for (std::size_t j = 0; j < ys.size(); ++j) {
        if (ys[j].size() != n)
            throw InvalidInputError("weighted_geometric_center: dimension mismatch");
        const double w = lambdas[j] / total;
        for (std::size_t i = 0; i < n; ++i) {
            if (ys[j][i] < kZeroFloor)
                throw DomainError("weighted_geometric_center: zero coordinate in a center");
            theta[i] += w * std::log(ys[j][i]);
        }
    }
    return softmax_point(theta);
}

DgfSetup euclidean_setup(std::size_t dim) {
    if (dim == 0) throw InvalidInputError("euclidean_setup: dim must be positive");
    DgfSetup s;
    s.dim_dual = dim;
    s.feasible_set = FeasibleSet::AllSpace;
    s.strong_convexity_mu_r = 1.0;
    s.r_value = [](const Vec& u) { return 0.5 * kernels::dot(u, u); };
    s.r_grad = [](const Vec& u) { return u; };
    s.conjugate_grad_on_U = [](const Vec& theta) { return theta; };
    s.divergence = [](const Vec& u, const Vec& w) {
        if (u.size() != w.size()) throw InvalidInputError("divergence: length mismatch");
        double d = 0.0;
        for (std::size_t i = 0; i < u.size(); ++i) {
            const double t = w[i] - u[i];
            d += t * t;
        }
        return 0.5 * d;
    };
    return s;
}

DgfSetup entropy_simplex_setup(std::size_t n) {
    if (n == 0) throw InvalidInputError("entropy_simplex_setup: n must be positive");
    DgfSetup s;
    s.dim_dual = n;
    s.feasible_set = FeasibleSet::Simplex;
    s.strong_convexity_mu_r = 1.0;  // w.r.t. the l1 norm (Pinsker)
    s.r_value = neg_entropy;
    s.r_grad = [](const Vec& u) {
        Vec g(u.size());
        for (std::size_t i = 0; i < u.size(); ++i) {
            if (u[i] < kZeroFloor)
                throw DomainError("r_grad: point touches the simplex boundary");
            g[i] = std::log(u[i]) + 1.0;
        }
        return g;
    };
    s.conjugate_grad_on_U = [](const Vec& theta) { return softmax_point(theta); };
    s.divergence = kl_divergence;
    return s;
}

DgfSetup truncated_simplex_setup(std::size_t n, double lo, double hi) {
    if (lo < 0.0 || lo > hi)
        throw InvalidInputError("truncated_simplex_setup: need 0 <= lo <= hi");
    const double nn = static_cast<double>(n);
    if (nn * lo > 1.0 + 1e-12 || nn * hi < 1.0 - 1e-12)
        throw InvalidInputError("truncated_simplex_setup: box excludes the simplex slice");
    DgfSetup s = entropy_simplex_setup(n);
    s.feasible_set = FeasibleSet::TruncatedSimplex;
    s.box_lo = lo;
    s.box_hi = hi;
    return s;
}

}  // namespace dualex
