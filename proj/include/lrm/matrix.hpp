#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace lrm {

/// Dense real matrix, row-major. The universal value type of the library:
/// targets, estimates, masks and noise matrices are all Matrix values.
/// Entries must stay finite; operations validate on entry.
class Matrix {
  public:
    Matrix() = default;
    Matrix(int rows, int cols)
        : rows_(rows), cols_(cols), data_(static_cast<std::size_t>(rows) * cols, 0.0) {}
    Matrix(int rows, int cols, std::vector<double> data);

    static Matrix zeros(int rows, int cols) { return Matrix(rows, cols); }
    static Matrix identity(int n);
    static Matrix diag(std::span<const double> values);
    static Matrix from_rows(const std::vector<std::vector<double>>& rows);

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    std::size_t size() const { return data_.size(); }

    double& operator()(int i, int j) { return data_[static_cast<std::size_t>(i) * cols_ + j]; }
    double operator()(int i, int j) const {
        return data_[static_cast<std::size_t>(i) * cols_ + j];
    }

    std::span<const double> entries() const { return data_; }
    std::span<double> entries() { return data_; }
    std::span<const double> row(int i) const {
        return std::span<const double>(data_).subspan(static_cast<std::size_t>(i) * cols_, cols_);
    }

    bool is_finite() const;
    bool same_shape(const Matrix& other) const {
        return rows_ == other.rows_ && cols_ == other.cols_;
    }

    Matrix transposed() const;

    Matrix& operator+=(const Matrix& other);
    Matrix& operator-=(const Matrix& other);
    Matrix& operator*=(double scalar);

    friend Matrix operator+(Matrix a, const Matrix& b) { return a += b; }
    friend Matrix operator-(Matrix a, const Matrix& b) { return a -= b; }
    friend Matrix operator*(Matrix a, double s) { return a *= s; }
    friend Matrix operator*(double s, Matrix a) { return a *= s; }
    friend bool operator==(const Matrix& a, const Matrix& b) {
        return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.data_ == b.data_;
    }

  private:
    int rows_ = 0;
    int cols_ = 0;
    std::vector<double> data_;
};

Matrix matmul(const Matrix& a, const Matrix& b);
// trace(a' * b) = entrywise dot product
double trace_dot(const Matrix& a, const Matrix& b);
double frobenius_norm(const Matrix& a);
double max_abs(const Matrix& a);

/// Thin SVD a = u * diag(singular_values) * v', with singular values sorted
/// descending and k = min(rows, cols) columns in u and v.
struct SvdFactors {
    Matrix u;
    std::vector<double> singular_values;
    Matrix v;

    Matrix reconstruct() const;
};

/// One-sided Jacobi SVD on the wider orientation. Deterministic; accurate to
/// ~1e-14 relative at the desk scales this library targets (dims <= ~200).
/// Singular values below 1e-13 * sigma_1 are clamped to exactly zero.
SvdFactors svd(const Matrix& a);

/// Schatten (quasi-)norm (sum_j sigma_j^p)^(1/p); p = infinity gives the
/// spectral norm sigma_1. Requires p > 0.
double schatten(const Matrix& a, double p);
double schatten(std::span<const double> singular_values, double p);

/// Number of singular values above tol * sigma_1 (0 for the zero matrix).
int numerical_rank(const Matrix& a, double tol = 1e-9);

/// Decomposition b = b1 + b2 relative to the row/column spaces of a:
/// rank(b1) <= 2 rank(a), a b2' = 0, a' b2 = 0 and trace(b1' b2) = 0.
struct RankSplit {
    Matrix b1;
    Matrix b2;
};

RankSplit rank_split(const Matrix& a, const Matrix& b);

} // namespace lrm
