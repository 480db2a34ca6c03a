// Timing comparison of the OpenMP kernels against their serial reference
// implementations: Gram assembly, cross covariance, factor inversion, Monte
// Carlo hypervolume, and EHVI sampling.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "mixopt/acquisition.hpp"
#include "mixopt/gp.hpp"
#include "mixopt/kernels.hpp"
#include "mixopt/linalg.hpp"
#include "mixopt/pareto.hpp"
#include "mixopt/rng.hpp"

using namespace mixopt;

namespace {

double time_ms(const std::function<void()>& fn, int reps) {
    fn();  // warm up
    auto t0 = std::chrono::steady_clock::now();
    for (int r = 0; r < reps; ++r) fn();
    auto t1 = std::chrono::steady_clock::now();
    return std::chrono::duration<double, std::milli>(t1 - t0).count() / reps;
}

void report(const char* name, double serial_ms, double parallel_ms) {
    std::printf("%-28s serial %9.3f ms   parallel %9.3f ms   speedup %5.2fx\n", name, serial_ms,
                parallel_ms, serial_ms / parallel_ms);
}

Matrix random_inputs(std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    Matrix x(n, kGpDim);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < kGpDim; ++j) x(i, j) = rng.next_double();
    return x;
}

}  // namespace

int main(int argc, char** argv) {
    std::size_t n = 512;
    if (argc > 1) n = static_cast<std::size_t>(std::stoul(argv[1]));
    const int reps = 3;

#ifdef _OPENMP
    std::printf("openmp threads: %d, n = %zu\n", omp_get_max_threads(), n);
#else
    std::printf("built without openmp, n = %zu\n", n);
#endif

    Matrix x = random_inputs(n, 7);
    KernelHyperparams h;
    h.alpha = 0.8;
    h.beta = 1.7;
    h.ell_time = 0.9;
    for (auto& e : h.ell_joint) e = 0.8;
    h.noise_var = 0.05;

    report("gram_matrix",
           time_ms([&] { reference::gram_matrix(x, h); }, reps),
           time_ms([&] { gram_matrix(x, h); }, reps));

    Matrix xs = random_inputs(n / 2, 11);
    report("cross_covariance",
           time_ms([&] { reference::cross_covariance(x, xs, h); }, reps),
           time_ms([&] { cross_covariance(x, xs, h); }, reps));

    Matrix k = gram_matrix(x, h);
    for (std::size_t i = 0; i < n; ++i) k(i, i) += 0.1;
    Matrix l = *cholesky(k);
    report("inverse_from_cholesky",
           time_ms([&] { reference::inverse_from_cholesky(l); }, reps),
           time_ms([&] { inverse_from_cholesky(l); }, reps));

    // Monte Carlo hypervolume over a random 2-objective front
    Rng rng(11);
    std::vector<Vector> points;
    for (int i = 0; i < 64; ++i) points.push_back({rng.next_double(), rng.next_double()});
    Vector ref_pt = {0.0, 0.0};
    const std::size_t mc_n = 1u << 20;
    report("hypervolume_mc (2^20)",
           time_ms([&] { reference::hypervolume_mc(points, ref_pt, mc_n, 5); }, reps),
           time_ms([&] { hypervolume_mc(points, ref_pt, mc_n, 5); }, reps));

    EhviSampler sampler(pareto_front(points), ref_pt, 1u << 16, 99);
    Matrix means(4, 2), vars(4, 2);
    for (std::size_t j = 0; j < 4; ++j) {
        means(j, 0) = 0.8 + 0.05 * static_cast<double>(j);
        means(j, 1) = 0.8;
        vars(j, 0) = 0.04;
        vars(j, 1) = 0.0;
    }
    report("ehvi q=4 (2^16)",
           time_ms([&] { reference::ehvi(sampler, means, vars); }, reps),
           time_ms([&] { sampler.ehvi(means, vars); }, reps));

    return 0;
}
