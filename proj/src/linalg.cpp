#include "gait/linalg.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>

#include "gait/error.hpp"

namespace gait {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstView = Eigen::Map<const RowMat>;
using MutView = Eigen::Map<RowMat>;

ConstView view(const Matrix& m) {
  return ConstView(m.data().data(), static_cast<Eigen::Index>(m.rows()),
                   static_cast<Eigen::Index>(m.cols()));
}

MutView view(Matrix& m) {
  return MutView(m.data().data(), static_cast<Eigen::Index>(m.rows()),
                 static_cast<Eigen::Index>(m.cols()));
}

std::string shape(const Matrix& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

void require_nonzero_dims(std::size_t rows, std::size_t cols) {
  if (rows == 0 || cols == 0) {
    throw InvalidArgument("matrix dimensions must be >= 1, got " +
                          std::to_string(rows) + "x" + std::to_string(cols));
  }
}

void require_finite(std::span<const double> values) {
  for (double v : values) {
    if (!std::isfinite(v)) throw InvalidArgument("matrix entries must be finite");
  }
}

void require_same_shape(const Matrix& a, const Matrix& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw DimensionMismatch(std::string(op) + ": " + shape(a) + " vs " + shape(b));
  }
}

}  // namespace

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols) {
  require_nonzero_dims(rows, cols);
  if (!std::isfinite(fill)) throw InvalidArgument("matrix entries must be finite");
  data_.assign(rows * cols, fill);
}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  require_nonzero_dims(rows, cols);
  if (data_.size() != rows * cols) {
    throw DimensionMismatch("matrix data has " + std::to_string(data_.size()) +
                            " entries, expected " + std::to_string(rows * cols));
  }
  require_finite(data_);
}

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows) {
  rows_ = rows.size();
  cols_ = rows_ == 0 ? 0 : rows.begin()->size();
  require_nonzero_dims(rows_, cols_);
  data_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    if (r.size() != cols_) throw DimensionMismatch("ragged matrix initializer");
    data_.insert(data_.end(), r.begin(), r.end());
  }
  require_finite(data_);
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::column(std::span<const double> values) {
  return Matrix(values.size(), 1, std::vector<double>(values.begin(), values.end()));
}

Matrix Matrix::diagonal(std::span<const double> values) {
  Matrix m(values.size(), values.size());
  for (std::size_t i = 0; i < values.size(); ++i) m(i, i) = values[i];
  require_finite(values);
  return m;
}

Vector Matrix::col(std::size_t c) const {
  Vector out(rows_);
  for (std::size_t r = 0; r < rows_; ++r) out[r] = (*this)(r, c);
  return out;
}

void Matrix::set_col(std::size_t c, std::span<const double> values) {
  if (values.size() != rows_) throw DimensionMismatch("set_col: length mismatch");
  for (std::size_t r = 0; r < rows_; ++r) (*this)(r, c) = values[r];
}

Matrix Matrix::row_block(std::size_t first, std::size_t count) const {
  if (first + count > rows_ || count == 0) {
    throw DimensionMismatch("row_block out of range for " + shape(*this));
  }
  Matrix out;
  out.rows_ = count;
  out.cols_ = cols_;
  out.data_.assign(data_.begin() + static_cast<std::ptrdiff_t>(first * cols_),
                   data_.begin() + static_cast<std::ptrdiff_t>((first + count) * cols_));
  return out;
}

Matrix Matrix::zero_padded(std::size_t rows) const {
  if (rows < rows_) throw DimensionMismatch("zero_padded cannot shrink " + shape(*this));
  Matrix out(rows, cols_);
  std::copy(data_.begin(), data_.end(), out.data_.begin());
  return out;
}

Matrix Matrix::transposed() const {
  Matrix out(cols_, rows_);
  view(out) = view(*this).transpose();
  return out;
}

bool Matrix::all_finite() const noexcept {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

Matrix& Matrix::operator+=(const Matrix& other) {
  require_same_shape(*this, other, "operator+=");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
  return *this;
}

Matrix& Matrix::operator-=(const Matrix& other) {
  require_same_shape(*this, other, "operator-=");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= other.data_[i];
  return *this;
}

Matrix& Matrix::operator*=(double s) {
  for (double& v : data_) v *= s;
  return *this;
}

Matrix operator+(Matrix a, const Matrix& b) { return a += b; }
Matrix operator-(Matrix a, const Matrix& b) { return a -= b; }
Matrix operator*(Matrix a, double s) { return a *= s; }
Matrix operator*(double s, Matrix a) { return a *= s; }

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) throw DimensionMismatch("matmul: " + shape(a) + " * " + shape(b));
  Matrix out(a.rows(), b.cols());
  view(out).noalias() = view(a) * view(b);
  return out;
}

Matrix matmul_tn(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows()) {
    throw DimensionMismatch("matmul_tn: " + shape(a) + "^T * " + shape(b));
  }
  Matrix out(a.cols(), b.cols());
  view(out).noalias() = view(a).transpose() * view(b);
  return out;
}

Matrix matmul_nt(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.cols()) {
    throw DimensionMismatch("matmul_nt: " + shape(a) + " * " + shape(b) + "^T");
  }
  Matrix out(a.rows(), b.rows());
  view(out).noalias() = view(a) * view(b).transpose();
  return out;
}

Vector matvec(const Matrix& a, std::span<const double> x) {
  if (a.cols() != x.size()) throw DimensionMismatch("matvec: width mismatch");
  Vector out(a.rows(), 0.0);
  for (std::size_t r = 0; r < a.rows(); ++r) out[r] = dot(a.row(r), x);
  return out;
}

Matrix hadamard(const Matrix& a, const Matrix& b) {
  require_same_shape(a, b, "hadamard");
  Matrix out = a;
  auto o = out.data();
  auto bd = b.data();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] *= bd[i];
  return out;
}

double frobenius_norm(const Matrix& m) { return m.empty() ? 0.0 : view(m).norm(); }

double max_abs(const Matrix& m) {
  double best = 0.0;
  for (double v : m.data()) best = std::max(best, std::abs(v));
  return best;
}

double max_abs_diff(const Matrix& a, const Matrix& b) {
  require_same_shape(a, b, "max_abs_diff");
  return a.empty() ? 0.0 : (view(a) - view(b)).cwiseAbs().maxCoeff();
}

double relative_error(const Matrix& a, const Matrix& b) {
  require_same_shape(a, b, "relative_error");
  const double diff = (view(a) - view(b)).norm();
  const double ref = view(b).norm();
  return ref > 0.0 ? diff / ref : diff;
}

double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw DimensionMismatch("dot: length mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double determinant(const Matrix& m) {
  if (!m.is_square()) throw DimensionMismatch("determinant of non-square " + shape(m));
  return view(m).partialPivLu().determinant();
}

struct LuFactorization::Impl {
  Eigen::PartialPivLU<RowMat> lu;
};

LuFactorization::LuFactorization(const Matrix& m) : n_(m.rows()) {
  if (!m.is_square() || m.empty()) {
    throw DimensionMismatch("LU factorization needs a square matrix, got " + shape(m));
  }
  impl_ = std::make_unique<Impl>();
  impl_->lu.compute(view(m));
  const double scale = max_abs(m);
  const auto& packed = impl_->lu.matrixLU();
  double smallest = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < packed.rows(); ++i) {
    smallest = std::min(smallest, std::abs(packed(i, i)));
  }
  if (!(smallest >= kSingularPivotTolerance * scale) || scale == 0.0) {
    std::ostringstream msg;
    msg << "matrix " << shape(m) << " is singular: smallest pivot " << smallest
        << " vs max entry " << scale;
    throw SingularMatrix(msg.str());
  }
}

LuFactorization::~LuFactorization() = default;
LuFactorization::LuFactorization(LuFactorization&&) noexcept = default;
LuFactorization& LuFactorization::operator=(LuFactorization&&) noexcept = default;

Matrix LuFactorization::solve(const Matrix& rhs) const {
  if (rhs.rows() != n_) throw DimensionMismatch("LU solve: rhs has wrong row count");
  Matrix out(rhs.rows(), rhs.cols());
  view(out) = impl_->lu.solve(view(rhs));
  return out;
}

Vector LuFactorization::solve(std::span<const double> rhs) const {
  return solve(Matrix::column(rhs)).col(0);
}

Matrix LuFactorization::inverse() const { return solve(Matrix::identity(n_)); }

Matrix invert(const Matrix& m) { return LuFactorization(m).inverse(); }

Matrix orthogonal_init(std::size_t n, Rng& rng) {
  if (n == 0) throw InvalidArgument("orthogonal_init requires n >= 1");
  RowMat g(n, n);
  for (Eigen::Index r = 0; r < g.rows(); ++r) {
    for (Eigen::Index c = 0; c < g.cols(); ++c) g(r, c) = rng.normal();
  }
  Eigen::HouseholderQR<RowMat> qr(g);
  RowMat q = qr.householderQ();
  const RowMat& r = qr.matrixQR();
  for (Eigen::Index c = 0; c < q.cols(); ++c) {
    if (r(c, c) < 0.0) q.col(c) *= -1.0;
  }
  Matrix out(n, n);
  view(out) = q;
  return out;
}

Matrix xavier_init(std::size_t n_rows, std::size_t n_cols, Rng& rng) {
  Matrix out(n_rows, n_cols);
  const double bound = std::sqrt(6.0 / static_cast<double>(n_rows + n_cols));
  for (double& v : out.data()) v = rng.uniform(-bound, bound);
  return out;
}

double orthogonality_error(const Matrix& w) {
  if (!w.is_square()) throw DimensionMismatch("orthogonality_error of non-square " + shape(w));
  const auto n = static_cast<Eigen::Index>(w.rows());
  return (view(w) * view(w).transpose() - RowMat::Identity(n, n)).norm();
}

}  // namespace gait
