#pragma once

#include <array>
#include <cstddef>

#include "mixopt/dataset.hpp"
#include "mixopt/linalg.hpp"

namespace mixopt {

// GP inputs are rows of [10 scaled mix features, warped time].
constexpr std::size_t kGpDim = kNumFeatures + 1;

// log(t + delta); the shift admits the t=0 zero-strength rows.
double time_warp(double t_days, double delta_days);

// exponentiated quadratic over warped time
double k_time(double a, double b, double ell);

// Matern 5/2 with per-dimension lengthscales, unit variance
double matern52(double r);
double k_joint(const double* u, const double* v, const double* ells, std::size_t dim);

struct KernelHyperparams {
    double alpha = 1.0;      // variance of the composition-independent time term
    double beta = 1.0;       // variance of the joint composition/time term
    double ell_time = 1.0;
    std::array<double, kGpDim> ell_joint{};
    double noise_var = 0.01;
    double mean_const = 0.0;  // constant prior mean, ksi

    KernelHyperparams() { ell_joint.fill(1.0); }

    void validate() const;  // positivity checks, NumericalError on violation
};

// alpha * k_time + beta * k_joint; p and q are kGpDim rows, warped time last.
double composite_kernel(const double* p, const double* q, const KernelHyperparams& h);

// Symmetric Gram matrix of the composite kernel. Entries are independent, so
// the parallel version is bit-identical to the serial reference.
Matrix gram_matrix(const Matrix& x, const KernelHyperparams& h);

// k(X, X*): rows follow training points, columns the queries.
Matrix cross_covariance(const Matrix& x, const Matrix& xstar, const KernelHyperparams& h);

// Unit-variance component matrices reused by the marginal-likelihood
// gradient: t_unit (SE over warped time), j_unit (Matern), r_dist (scaled
// distance for the Matern term).
void gram_components(const Matrix& x, const KernelHyperparams& h, Matrix& t_unit,
                     Matrix& j_unit, Matrix& r_dist);

namespace reference {
Matrix gram_matrix(const Matrix& x, const KernelHyperparams& h);
Matrix cross_covariance(const Matrix& x, const Matrix& xstar, const KernelHyperparams& h);
}  // namespace reference

}  // namespace mixopt
