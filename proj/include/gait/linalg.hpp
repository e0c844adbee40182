#pragma once

#include <cstddef>
#include <initializer_list>
#include <memory>
#include <span>
#include <vector>

#include "gait/rng.hpp"

namespace gait {

using Vector = std::vector<double>;

// Dense row-major matrix of doubles.
//
// A default-constructed Matrix is empty (0 x 0) and only serves as a
// placeholder; every other constructor requires rows >= 1 and cols >= 1.
// Constructors that accept caller data reject non-finite entries.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);
  Matrix(std::initializer_list<std::initializer_list<double>> rows);

  static Matrix identity(std::size_t n);
  static Matrix column(std::span<const double> values);
  static Matrix diagonal(std::span<const double> values);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }
  bool is_square() const noexcept { return rows_ == cols_; }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }
  std::span<double> row(std::size_t r) {
    return std::span<double>(data_).subspan(r * cols_, cols_);
  }
  std::span<const double> row(std::size_t r) const {
    return std::span<const double>(data_).subspan(r * cols_, cols_);
  }

  Vector col(std::size_t c) const;
  void set_col(std::size_t c, std::span<const double> values);

  // Copy of rows [first, first + count).
  Matrix row_block(std::size_t first, std::size_t count) const;
  // Copy with `rows` rows: the leading rows of *this, then zero rows.
  Matrix zero_padded(std::size_t rows) const;

  Matrix transposed() const;
  bool all_finite() const noexcept;

  Matrix& operator+=(const Matrix& other);
  Matrix& operator-=(const Matrix& other);
  Matrix& operator*=(double s);

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

Matrix operator+(Matrix a, const Matrix& b);
Matrix operator-(Matrix a, const Matrix& b);
Matrix operator*(Matrix a, double s);
Matrix operator*(double s, Matrix a);

Matrix matmul(const Matrix& a, const Matrix& b);
// a^T * b
Matrix matmul_tn(const Matrix& a, const Matrix& b);
// a * b^T
Matrix matmul_nt(const Matrix& a, const Matrix& b);
Vector matvec(const Matrix& a, std::span<const double> x);
Matrix hadamard(const Matrix& a, const Matrix& b);

double frobenius_norm(const Matrix& m);
double max_abs(const Matrix& m);
double max_abs_diff(const Matrix& a, const Matrix& b);
// ||a - b||_F / ||b||_F; returns ||a||_F when b is zero.
double relative_error(const Matrix& a, const Matrix& b);
double dot(std::span<const double> a, std::span<const double> b);
double determinant(const Matrix& m);

// Relative pivot magnitude below which a matrix is treated as singular.
inline constexpr double kSingularPivotTolerance = 1e-12;

// Partially pivoted LU factorization. Construction throws SingularMatrix
// when some |U_ii| < kSingularPivotTolerance * max|m_ij|.
class LuFactorization {
 public:
  explicit LuFactorization(const Matrix& m);
  ~LuFactorization();
  LuFactorization(LuFactorization&&) noexcept;
  LuFactorization& operator=(LuFactorization&&) noexcept;

  std::size_t dim() const noexcept { return n_; }
  // Solves m * x = rhs for every column of rhs.
  Matrix solve(const Matrix& rhs) const;
  Vector solve(std::span<const double> rhs) const;
  Matrix inverse() const;

 private:
  struct Impl;
  std::size_t n_ = 0;
  std::unique_ptr<Impl> impl_;
};

Matrix invert(const Matrix& m);

// Q from the QR factorization of a standard-Gaussian matrix, with the signs
// of R's diagonal forced positive.
Matrix orthogonal_init(std::size_t n, Rng& rng);
// Uniform on +-sqrt(6 / (n_rows + n_cols)).
Matrix xavier_init(std::size_t n_rows, std::size_t n_cols, Rng& rng);
// ||W W^T - I||_F
double orthogonality_error(const Matrix& w);

}  // namespace gait
