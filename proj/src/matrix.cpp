#include "nashae/matrix.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cmath>

#include "nashae/errors.hpp"

namespace nashae {
namespace {

using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMap = Eigen::Map<const RowMajor>;
using Map = Eigen::Map<RowMajor>;

ConstMap view(const RealMatrix& m) {
  return ConstMap(m.flat().data(), static_cast<Eigen::Index>(m.rows()),
                  static_cast<Eigen::Index>(m.cols()));
}

Map view(RealMatrix& m) {
  return Map(m.flat().data(), static_cast<Eigen::Index>(m.rows()),
             static_cast<Eigen::Index>(m.cols()));
}

[[noreturn]] void shape_mismatch(const char* op, const RealMatrix& a, const RealMatrix& b) {
  throw ShapeError(std::string(op) + ": incompatible shapes " + a.shape_string() + " and " +
                   b.shape_string());
}

}  // namespace

RealMatrix::RealMatrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

RealMatrix::RealMatrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(data.begin(), data.end()) {
  if (data_.size() != rows * cols) {
    throw ShapeError("RealMatrix: " + std::to_string(data.size()) +
                     " values do not fill a " + shape_string() + " matrix");
  }
}

RealMatrix::RealMatrix(std::initializer_list<std::initializer_list<double>> rows) {
  rows_ = rows.size();
  cols_ = rows_ == 0 ? 0 : rows.begin()->size();
  data_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    if (r.size() != cols_) throw ShapeError("RealMatrix: ragged initializer list");
    data_.insert(data_.end(), r.begin(), r.end());
  }
}

std::vector<double> RealMatrix::column(std::size_t c) const {
  if (c >= cols_) throw ShapeError("column index out of range for " + shape_string());
  std::vector<double> out(rows_);
  for (std::size_t r = 0; r < rows_; ++r) out[r] = (*this)(r, c);
  return out;
}

void RealMatrix::set_column(std::size_t c, std::span<const double> values) {
  if (c >= cols_ || values.size() != rows_) {
    throw ShapeError("set_column: bad column or length for " + shape_string());
  }
  for (std::size_t r = 0; r < rows_; ++r) (*this)(r, c) = values[r];
}

void RealMatrix::fill(double value) { std::fill(data_.begin(), data_.end(), value); }

bool RealMatrix::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

std::string RealMatrix::shape_string() const {
  return std::to_string(rows_) + "x" + std::to_string(cols_);
}

RealMatrix matmul(const RealMatrix& a, const RealMatrix& b) {
  if (a.cols() != b.rows()) shape_mismatch("matmul", a, b);
  RealMatrix out(a.rows(), b.cols());
  if (out.empty()) return out;
  view(out).noalias() = view(a) * view(b);
  return out;
}

RealMatrix matmul_transpose_b(const RealMatrix& a, const RealMatrix& b) {
  if (a.cols() != b.cols()) shape_mismatch("matmul_transpose_b", a, b);
  RealMatrix out(a.rows(), b.rows());
  if (out.empty()) return out;
  view(out).noalias() = view(a) * view(b).transpose();
  return out;
}

RealMatrix matmul_transpose_a(const RealMatrix& a, const RealMatrix& b) {
  if (a.rows() != b.rows()) shape_mismatch("matmul_transpose_a", a, b);
  RealMatrix out(a.cols(), b.cols());
  if (out.empty()) return out;
  view(out).noalias() = view(a).transpose() * view(b);
  return out;
}

void matmul_transpose_a_accumulate(const RealMatrix& a, const RealMatrix& b, RealMatrix& out) {
  if (a.rows() != b.rows()) shape_mismatch("matmul_transpose_a_accumulate", a, b);
  if (out.rows() != a.cols() || out.cols() != b.cols()) {
    shape_mismatch("matmul_transpose_a_accumulate (output)", out, a);
  }
  if (out.empty() || a.rows() == 0) return;
  view(out).noalias() += view(a).transpose() * view(b);
}

RealMatrix transpose(const RealMatrix& m) {
  RealMatrix out(m.cols(), m.rows());
  for (std::size_t r = 0; r < m.rows(); ++r)
    for (std::size_t c = 0; c < m.cols(); ++c) out(c, r) = m(r, c);
  return out;
}

RealMatrix gather_rows(const RealMatrix& m, std::span<const std::size_t> indices) {
  RealMatrix out(indices.size(), m.cols());
  for (std::size_t i = 0; i < indices.size(); ++i) {
    if (indices[i] >= m.rows()) throw ShapeError("gather_rows: row index out of range");
    auto src = m.row(indices[i]);
    std::copy(src.begin(), src.end(), out.row(i).begin());
  }
  return out;
}

std::vector<double> column_means(const RealMatrix& m) {
  std::vector<double> means(m.cols(), 0.0);
  if (m.rows() == 0) return means;
  for (std::size_t r = 0; r < m.rows(); ++r) {
    auto row = m.row(r);
    for (std::size_t c = 0; c < m.cols(); ++c) means[c] += row[c];
  }
  for (double& v : means) v /= static_cast<double>(m.rows());
  return means;
}

void require_same_shape(const RealMatrix& a, const RealMatrix& b, const char* what) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) shape_mismatch(what, a, b);
}

}  // namespace nashae
