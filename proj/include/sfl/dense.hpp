#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

namespace sfl {

using Vector = std::vector<double>;

// Row-major dense matrix. Small and predictable; everything in this project is
// desk-scale (n <= 5000), so no expression templates, no views.
class Matrix {
  public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    static Matrix identity(std::size_t n) {
        Matrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    double* row(std::size_t i) { return data_.data() + i * cols_; }
    const double* row(std::size_t i) const { return data_.data() + i * cols_; }

    Vector& data() { return data_; }
    const Vector& data() const { return data_; }

    Vector col(std::size_t j) const {
        Vector v(rows_);
        for (std::size_t i = 0; i < rows_; ++i) v[i] = (*this)(i, j);
        return v;
    }
    void set_col(std::size_t j, const Vector& v) {
        for (std::size_t i = 0; i < rows_; ++i) (*this)(i, j) = v[i];
    }

  private:
    std::size_t rows_ = 0, cols_ = 0;
    Vector data_;
};

// ---- free vector/matrix helpers ----

double dot(const Vector& a, const Vector& b);
double norm2(const Vector& a);
void axpy(double alpha, const Vector& x, Vector& y);  // y += alpha*x

Matrix matmul(const Matrix& a, const Matrix& b);
Matrix transpose(const Matrix& a);
// C = A^T * B without forming A^T
Matrix gram_style(const Matrix& a, const Matrix& b);
Vector matvec(const Matrix& a, const Vector& x);

double frobenius(const Matrix& a);
double frobenius_diff(const Matrix& a, const Matrix& b);

struct EigenResult {
    Vector values;   // ascending
    Matrix vectors;  // column i pairs with values[i]
};

// Symmetric eigendecomposition: Householder tridiagonalization followed by
// implicit-shift QL, then ascending sort and a deterministic sign convention
// (first entry with |u_i| > 1e-12 * max|u| made positive).
// Throws std::runtime_error if QL fails to converge.
EigenResult symmetric_eigen(const Matrix& a);

// Solve A x = b by LU with partial pivoting. Throws on (numerically) singular A.
Vector solve_linear(Matrix a, Vector b);

// Least-squares solve min ||A x - b||_2 via normal equations with pivoted LU.
Vector solve_least_squares(const Matrix& a, const Vector& b);

}  // namespace sfl
