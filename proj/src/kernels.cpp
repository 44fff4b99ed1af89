#include "dualex/kernels.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>

namespace dualex::kernels {

namespace {
std::atomic<bool> g_parallel{true};
// Below this many flops the OpenMP fork/join overhead dominates.
constexpr std::size_t kParThreshold = 1u << 14;
}  // namespace

void set_parallel_enabled(bool on) { g_parallel.store(on); }
bool parallel_enabled() { return g_parallel.load(); }

double dot_serial(const Vec& a, const Vec& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double dot_omp(const Vec& a, const Vec& b) {
    double s = 0.0;
    const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(a.size());
#pragma omp parallel for reduction(+ : s) schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) s += a[i] * b[i];
    return s;
}

double dot(const Vec& a, const Vec& b) {
    if (a.size() != b.size()) throw InvalidInputError("dot: length mismatch");
    return (parallel_enabled() && a.size() >= kParThreshold) ? dot_omp(a, b)
                                                             : dot_serial(a, b);
}

double nrm2(const Vec& a) { return std::sqrt(dot_serial(a, a)); }

void gemv_serial(const Matrix& A, const Vec& y, Vec& out) {
    out.assign(A.rows, 0.0);
    for (std::size_t i = 0; i < A.rows; ++i) {
        const double* row = &A.data[i * A.cols];
        double s = 0.0;
        for (std::size_t j = 0; j < A.cols; ++j) s += row[j] * y[j];
        out[i] = s;
    }
}

void gemv_omp(const Matrix& A, const Vec& y, Vec& out) {
    out.assign(A.rows, 0.0);
    const std::ptrdiff_t rows = static_cast<std::ptrdiff_t>(A.rows);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < rows; ++i) {
        const double* row = &A.data[static_cast<std::size_t>(i) * A.cols];
        double s = 0.0;
        for (std::size_t j = 0; j < A.cols; ++j) s += row[j] * y[j];
        out[i] = s;
    }
}

void gemv(const Matrix& A, const Vec& y, Vec& out) {
    if (y.size() != A.cols) throw InvalidInputError("gemv: length mismatch");
    if (parallel_enabled() && A.rows * A.cols >= kParThreshold)
        gemv_omp(A, y, out);
    else
        gemv_serial(A, y, out);
}

void gemv_t_serial(const Matrix& A, const Vec& x, Vec& out) {
    out.assign(A.cols, 0.0);
    for (std::size_t i = 0; i < A.rows; ++i) {
        const double* row = &A.data[i * A.cols];
        const double xi = x[i];
        for (std::size_t j = 0; j < A.cols; ++j) out[j] += row[j] * xi;
    }
}

void gemv_t_omp(const Matrix& A, const Vec& x, Vec& out) {
    out.assign(A.cols, 0.0);
    const std::ptrdiff_t cols = static_cast<std::ptrdiff_t>(A.cols);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t j = 0; j < cols; ++j) {
        double s = 0.0;
        for (std::size_t i = 0; i < A.rows; ++i)
            s += A.data[i * A.cols + static_cast<std::size_t>(j)] * x[i];
        out[j] = s;
    }
}

void gemv_t(const Matrix& A, const Vec& x, Vec& out) {
    if (x.size() != A.rows) throw InvalidInputError("gemv_t: length mismatch");
    if (parallel_enabled() && A.rows * A.cols >= kParThreshold)
        gemv_t_omp(A, x, out);
    else
        gemv_t_serial(A, x, out);
}

namespace {
double max_entry(const Vec& v) {
    double m = v[0];
    for (double t : v) m = std::max(m, t);
    return m;
}
}  // namespace

double logsumexp_serial(const Vec& theta) {
    if (theta.empty()) throw InvalidInputError("logsumexp: empty input");
    for (double t : theta)
        if (std::isnan(t)) throw InvalidInputError("logsumexp: NaN input");
    const double m = max_entry(theta);
    double s = 0.0;
    for (double t : theta) s += std::exp(t - m);
    return m + std::log(s);
}

double logsumexp_omp(const Vec& theta) {
    if (theta.empty()) throw InvalidInputError("logsumexp: empty input");
    const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(theta.size());
    double m = theta[0];
    bool nan = false;
#pragma omp parallel for reduction(max : m) reduction(|| : nan) schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        nan = nan || std::isnan(theta[i]);
        m = std::max(m, theta[i]);
    }
    if (nan) throw InvalidInputError("logsumexp: NaN input");
    double s = 0.0;
#pragma omp parallel for reduction(+ : s) schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) s += std::exp(theta[i] - m);
    return m + std::log(s);
}

double logsumexp(const Vec& theta) {
    return (parallel_enabled() && theta.size() >= kParThreshold)
               ? logsumexp_omp(theta)
               : logsumexp_serial(theta);
}

double softmax_serial(const Vec& theta, Vec& out) {
    if (theta.empty()) throw InvalidInputError("softmax: empty input");
    for (double t : theta)
        if (std::isnan(t)) throw InvalidInputError("softmax: NaN input");
    const double m = max_entry(theta);
    out.resize(theta.size());
    double s = 0.0;
    for (std::size_t i = 0; i < theta.size(); ++i) {
        out[i] = std::exp(theta[i] - m);
        s += out[i];
    }
    const double inv = 1.0 / s;
    for (double& v : out) v *= inv;
    return m + std::log(s);
}

double softmax_omp(const Vec& theta, Vec& out) {
    if (theta.empty()) throw InvalidInputError("softmax: empty input");
    const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(theta.size());
    double m = theta[0];
    bool nan = false;
#pragma omp parallel for reduction(max : m) reduction(|| : nan) schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        nan = nan || std::isnan(theta[i]);
        m = std::max(m, theta[i]);
    }
    if (nan) throw InvalidInputError("softmax: NaN input");
    out.resize(theta.size());
    double s = 0.0;
#pragma omp parallel for reduction(+ : s) schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        out[i] = std::exp(theta[i] - m);
        s += out[i];
    }
    const double inv = 1.0 / s;
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) out[i] *= inv;
    return m + std::log(s);
}

double softmax(const Vec& theta, Vec& out) {
    return (parallel_enabled() && theta.size() >= kParThreshold)
               ? softmax_omp(theta, out)
               : softmax_serial(theta, out);
}

}  // namespace dualex::kernels
