#include "mixopt/linalg.hpp"

#include <cmath>
#include <cstddef>

namespace mixopt {

double dot(const Vector& a, const Vector& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

std::optional<Matrix> cholesky(const Matrix& a) {
    const std::size_t n = a.rows();
    Matrix l(n, n, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
        double d = a(j, j);
        const double* lj = l.row(j);
        for (std::size_t k = 0; k < j; ++k) d -= lj[k] * lj[k];
        if (!(d > 0.0) || !std::isfinite(d)) return std::nullopt;
        const double ljj = std::sqrt(d);
        l(j, j) = ljj;
        for (std::size_t i = j + 1; i < n; ++i) {
            double s = a(i, j);
            const double* li = l.row(i);
            for (std::size_t k = 0; k < j; ++k) s -= li[k] * lj[k];
            l(i, j) = s / ljj;
        }
    }
    return l;
}

Vector solve_lower(const Matrix& l, const Vector& b) {
    const std::size_t n = l.rows();
    Vector x(n);
    for (std::size_t i = 0; i < n; ++i) {
        double s = b[i];
        const double* li = l.row(i);
        for (std::size_t k = 0; k < i; ++k) s -= li[k] * x[k];
        x[i] = s / li[i];
    }
    return x;
}

Vector solve_lower_transpose(const Matrix& l, const Vector& b) {
    const std::size_t n = l.rows();
    Vector x(n);
    for (std::size_t ii = n; ii-- > 0;) {
        double s = b[ii];
        for (std::size_t k = ii + 1; k < n; ++k) s -= l(k, ii) * x[k];
        x[ii] = s / l(ii, ii);
    }
    return x;
}

Vector solve_cholesky(const Matrix& l, const Vector& b) {
    return solve_lower_transpose(l, solve_lower(l, b));
}

namespace {
// shared column kernel: e_j forward/backward solve, exploiting the leading
// zeros of e_j in the forward pass
void inverse_column(const Matrix& l, std::size_t j, Vector& v, double* out_col,
                    std::size_t stride) {
    const std::size_t n = l.rows();
    for (std::size_t i = 0; i < j; ++i) v[i] = 0.0;
    v[j] = 1.0 / l(j, j);
    for (std::size_t i = j + 1; i < n; ++i) {
        double s = 0.0;
        const double* li = l.row(i);
        for (std::size_t k = j; k < i; ++k) s -= li[k] * v[k];
        v[i] = s / li[i];
    }
    for (std::size_t ii = n; ii-- > 0;) {
        double s = v[ii];
        for (std::size_t k = ii + 1; k < n; ++k) s -= l(k, ii) * v[k];
        v[ii] = s / l(ii, ii);
        out_col[ii * stride] = v[ii];
    }
}
}  // namespace

Matrix inverse_from_cholesky(const Matrix& l) {
    const std::size_t n = l.rows();
    Matrix m(n, n, 0.0);
#pragma omp parallel
    {
        Vector v(n);
#pragma omp for schedule(dynamic, 8)
        for (long long jj = 0; jj < static_cast<long long>(n); ++jj) {
            const std::size_t j = static_cast<std::size_t>(jj);
            inverse_column(l, j, v, &m.data()[j], n);
        }
    }
    return m;
}

namespace reference {
Matrix inverse_from_cholesky(const Matrix& l) {
    const std::size_t n = l.rows();
    Matrix m(n, n, 0.0);
    Vector v(n);
    for (std::size_t j = 0; j < n; ++j) inverse_column(l, j, v, &m.data()[j], n);
    return m;
}
}  // namespace reference

}  // namespace mixopt
