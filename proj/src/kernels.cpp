#include "mixopt/kernels.hpp"

#include <cmath>

#include "mixopt/errors.hpp"

namespace mixopt {

double time_warp(double t_days, double delta_days) {
    return std::log(t_days + delta_days);
}

double k_time(double a, double b, double ell) {
    const double d = (a - b) / ell;
    return std::exp(-0.5 * d * d);
}

double matern52(double r) {
    const double sqrt5_r = std::sqrt(5.0) * r;
    return (1.0 + sqrt5_r + sqrt5_r * sqrt5_r / 3.0) * std::exp(-sqrt5_r);
}

double k_joint(const double* u, const double* v, const double* ells, std::size_t dim) {
    double r2 = 0.0;
    for (std::size_t d = 0; d < dim; ++d) {
        const double z = (u[d] - v[d]) / ells[d];
        r2 += z * z;
    }
    return matern52(std::sqrt(r2));
}

void KernelHyperparams::validate() const {
    if (!(alpha >= 0.0) || !(beta >= 0.0))
        throw NumericalError("kernel hyperparams: alpha, beta must be >= 0");
    if (!(ell_time > 0.0)) throw NumericalError("kernel hyperparams: ell_time must be > 0");
    for (double e : ell_joint)
        if (!(e > 0.0)) throw NumericalError("kernel hyperparams: ARD lengthscales must be > 0");
    if (!(noise_var >= 0.0)) throw NumericalError("kernel hyperparams: noise_var must be >= 0");
    if (!std::isfinite(mean_const)) throw NumericalError("kernel hyperparams: mean_const not finite");
}

double composite_kernel(const double* p, const double* q, const KernelHyperparams& h) {
    const double kt = k_time(p[kGpDim - 1], q[kGpDim - 1], h.ell_time);
    const double kj = k_joint(p, q, h.ell_joint.data(), kGpDim);
    return h.alpha * kt + h.beta * kj;
}

Matrix gram_matrix(const Matrix& x, const KernelHyperparams& h) {
    const std::size_t n = x.rows();
    Matrix k(n, n);
#pragma omp parallel for schedule(dynamic, 16)
    for (long long ii = 0; ii < static_cast<long long>(n); ++ii) {
        const std::size_t i = static_cast<std::size_t>(ii);
        for (std::size_t j = 0; j <= i; ++j) {
            const double v = composite_kernel(x.row(i), x.row(j), h);
            k(i, j) = v;
            k(j, i) = v;
        }
    }
    return k;
}

Matrix cross_covariance(const Matrix& x, const Matrix& xstar, const KernelHyperparams& h) {
    const std::size_t n = x.rows();
    const std::size_t m = xstar.rows();
    Matrix k(n, m);
#pragma omp parallel for schedule(static)
    for (long long ii = 0; ii < static_cast<long long>(n); ++ii) {
        const std::size_t i = static_cast<std::size_t>(ii);
        for (std::size_t j = 0; j < m; ++j) k(i, j) = composite_kernel(x.row(i), xstar.row(j), h);
    }
    return k;
}

void gram_components(const Matrix& x, const KernelHyperparams& h, Matrix& t_unit,
                     Matrix& j_unit, Matrix& r_dist) {
    const std::size_t n = x.rows();
    t_unit = Matrix(n, n);
    j_unit = Matrix(n, n);
    r_dist = Matrix(n, n);
#pragma omp parallel for schedule(dynamic, 16)
    for (long long ii = 0; ii < static_cast<long long>(n); ++ii) {
        const std::size_t i = static_cast<std::size_t>(ii);
        for (std::size_t j = 0; j <= i; ++j) {
            const double kt = k_time(x(i, kGpDim - 1), x(j, kGpDim - 1), h.ell_time);
            double r2 = 0.0;
            for (std::size_t d = 0; d < kGpDim; ++d) {
                const double z = (x(i, d) - x(j, d)) / h.ell_joint[d];
                r2 += z * z;
            }
            const double r = std::sqrt(r2);
            const double kj = matern52(r);
            t_unit(i, j) = t_unit(j, i) = kt;
            j_unit(i, j) = j_unit(j, i) = kj;
            r_dist(i, j) = r_dist(j, i) = r;
        }
    }
}

namespace reference {

Matrix gram_matrix(const Matrix& x, const KernelHyperparams& h) {
    const std::size_t n = x.rows();
    Matrix k(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j <= i; ++j) {
            const double v = composite_kernel(x.row(i), x.row(j), h);
            k(i, j) = v;
            k(j, i) = v;
        }
    return k;
}

Matrix cross_covariance(const Matrix& x, const Matrix& xstar, const KernelHyperparams& h) {
    const std::size_t n = x.rows();
    const std::size_t m = xstar.rows();
    Matrix k(n, m);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < m; ++j) k(i, j) = composite_kernel(x.row(i), xstar.row(j), h);
    return k;
}

}  // namespace reference

}  // namespace mixopt
