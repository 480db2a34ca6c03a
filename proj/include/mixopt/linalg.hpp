#pragma once

#include <cstddef>
#include <optional>
#include <vector>

namespace mixopt {

// Dense row-major matrix. Sized for the problems at hand (n in the hundreds);
// no views, no expression templates.
class Matrix {
  public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    double* row(std::size_t i) { return data_.data() + i * cols_; }
    const double* row(std::size_t i) const { return data_.data() + i * cols_; }

    std::vector<double>& data() { return data_; }
    const std::vector<double>& data() const { return data_; }

  private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

using Vector = std::vector<double>;

double dot(const Vector& a, const Vector& b);

// In-place lower Cholesky of a symmetric positive definite matrix.
// Returns nullopt when a nonpositive pivot is hit.
std::optional<Matrix> cholesky(const Matrix& a);

// Solve L x = b (forward) and L^T x = b (backward) for lower-triangular L.
Vector solve_lower(const Matrix& l, const Vector& b);
Vector solve_lower_transpose(const Matrix& l, const Vector& b);

// Solve (L L^T) x = b.
Vector solve_cholesky(const Matrix& l, const Vector& b);

// Full symmetric inverse (L L^T)^{-1}; columns are independent solves and run
// in parallel.
Matrix inverse_from_cholesky(const Matrix& l);

namespace reference {
// Serial twin kept for correctness testing and benchmarking.
Matrix inverse_from_cholesky(const Matrix& l);
}  // namespace reference

}  // namespace mixopt
