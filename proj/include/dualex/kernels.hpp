#pragma once

#include <cstddef>

#include "dualex/common.hpp"

// Dense kernels used everywhere in the library. Each has a plain serial
// implementation and an OpenMP one; the unsuffixed entry points dispatch on
// problem size (and a global toggle) so small problems skip thread overhead.
// The serial versions are the reference the OpenMP ones are tested against.
namespace dualex::kernels {

// Global switch, mostly for benchmarking; defaults to enabled.
void set_parallel_enabled(bool on);
bool parallel_enabled();

double dot_serial(const Vec& a, const Vec& b);
double dot_omp(const Vec& a, const Vec& b);
double dot(const Vec& a, const Vec& b);

double nrm2(const Vec& a);

// out = A y  (length rows)
void gemv_serial(const Matrix& A, const Vec& y, Vec& out);
void gemv_omp(const Matrix& A, const Vec& y, Vec& out);
void gemv(const Matrix& A, const Vec& y, Vec& out);

// out = A^T x  (length cols)
void gemv_t_serial(const Matrix& A, const Vec& x, Vec& out);
void gemv_t_omp(const Matrix& A, const Vec& x, Vec& out);
void gemv_t(const Matrix& A, const Vec& x, Vec& out);

// ln sum_i exp(theta_i), max-shifted.
double logsumexp_serial(const Vec& theta);
double logsumexp_omp(const Vec& theta);
double logsumexp(const Vec& theta);

// out_i = exp(theta_i - max) / sum, max-shifted; returns the logsumexp value.
double softmax_serial(const Vec& theta, Vec& out);
double softmax_omp(const Vec& theta, Vec& out);
double softmax(const Vec& theta, Vec& out);

}  // namespace dualex::kernels
