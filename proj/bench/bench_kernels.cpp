// Timing comparison of the serial and OpenMP kernel paths. On a single-core
// host the two should be close to parity; on multicore hosts the OpenMP
// column should win for the larger sizes.

#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <vector>

#include "dualex/kernels.hpp"
#include "dualex/rng.hpp"

using namespace dualex;
namespace k = dualex::kernels;

namespace {

double time_ms(const std::function<void()>& fn, int reps) {
    fn();  // warm up
    auto t0 = std::chrono::steady_clock::now();
    for (int i = 0; i < reps; ++i) fn();
    auto t1 = std::chrono::steady_clock::now();
    return std::chrono::duration<double, std::milli>(t1 - t0).count() / reps;
}

}  // namespace

int main() {
    auto rng = make_stream(7);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::printf("%-14s %10s %12s %12s %8s\n", "kernel", "size", "serial(ms)",
                "openmp(ms)", "ratio");

    for (std::size_t n : {1u << 12, 1u << 16, 1u << 20}) {
        Vec a(n), b(n), out;
        for (auto& v : a) v = u(rng);
        for (auto& v : b) v = u(rng);
        int reps = n > (1u << 18) ? 50 : 500;

        double ts = time_ms([&] { k::dot_serial(a, b); }, reps);
        double tp = time_ms([&] { k::dot_omp(a, b); }, reps);
        std::printf("%-14s %10zu %12.4f %12.4f %8.2f\n", "dot", n, ts, tp, ts / tp);

        ts = time_ms([&] { k::logsumexp_serial(a); }, reps);
        tp = time_ms([&] { k::logsumexp_omp(a); }, reps);
        std::printf("%-14s %10zu %12.4f %12.4f %8.2f\n", "logsumexp", n, ts, tp, ts / tp);

        ts = time_ms([&] { k::softmax_serial(a, out); }, reps);
        tp = time_ms([&] { k::softmax_omp(a, out); }, reps);
        std::printf("%-14s %10zu %12.4f %12.4f %8.2f\n", "softmax", n, ts, tp, ts / tp);
    }

    for (std::size_t dim : {64u, 256u, 1024u}) {
        Matrix A(dim, dim);
        for (auto& v : A.data) v = u(rng);
        Vec x(dim), out;
        for (auto& v : x) v = u(rng);
        int reps = dim >= 1024 ? 50 : 500;

        double ts = time_ms([&] { k::gemv_serial(A, x, out); }, reps);
        double tp = time_ms([&] { k::gemv_omp(A, x, out); }, reps);
        std::printf("%-14s %7zux%zu %12.4f %12.4f %8.2f\n", "gemv", dim, dim, ts, tp,
                    ts / tp);

        ts = time_ms([&] { k::gemv_t_serial(A, x, out); }, reps);
        tp = time_ms([&] { k::gemv_t_omp(A, x, out); }, reps);
        std::printf("%-14s %7zux%zu %12.4f %12.4f %8.2f\n", "gemv_t", dim, dim, ts, tp,
                    ts / tp);
    }
    return 0;
}
