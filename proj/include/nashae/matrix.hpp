#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <new>
#include <span>
#include <string>
#include <vector>

namespace nashae {

/// Over-aligned storage. Eigen picks its vectorised reduction order from
/// the buffer address, so a fixed alignment keeps results bit-reproducible
/// across copies of the same matrix. Aligns by hand inside a plain
/// allocation: glibc's memalign path fragments the heap under the
/// per-step allocation churn of training, and RSS grows without bound.
template <class T>
struct AlignedAllocator {
  using value_type = T;
  static constexpr std::size_t kAlign = 64;
  AlignedAllocator() = default;
  template <class U>
  AlignedAllocator(const AlignedAllocator<U>&) noexcept {}
  T* allocate(std::size_t n) {
    // Room for the alignment slack plus the original pointer just below
    // the returned address.
    void* raw = ::operator new(n * sizeof(T) + kAlign + sizeof(void*));
    const auto base = reinterpret_cast<std::uintptr_t>(raw) + sizeof(void*);
    const auto aligned = (base + kAlign - 1) & ~(std::uintptr_t{kAlign} - 1);
    reinterpret_cast<void**>(aligned)[-1] = raw;
    return reinterpret_cast<T*>(aligned);
  }
  void deallocate(T* p, std::size_t) noexcept { ::operator delete(reinterpret_cast<void**>(p)[-1]); }
  template <class U>
  bool operator==(const AlignedAllocator<U>&) const noexcept { return true; }
};

/// Vector storage for anything Eigen touches (biases, their moments).
using AlignedVector = std::vector<double, AlignedAllocator<double>>;

/// Dense row-major matrix of doubles. Used for data batches, latent
/// codes and layer parameters alike.
class RealMatrix {
 public:
  RealMatrix() = default;
  RealMatrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  RealMatrix(std::size_t rows, std::size_t cols, std::vector<double> data);
  RealMatrix(std::initializer_list<std::initializer_list<double>> rows);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  std::vector<double> column(std::size_t c) const;
  void set_column(std::size_t c, std::span<const double> values);

  std::span<double> flat() { return data_; }
  std::span<const double> flat() const { return data_; }

  void fill(double value);
  bool all_finite() const;

  /// "RxC", for error messages.
  std::string shape_string() const;

  friend bool operator==(const RealMatrix&, const RealMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  AlignedVector data_;
};

/// a * b.
RealMatrix matmul(const RealMatrix& a, const RealMatrix& b);
/// a * b^T.
RealMatrix matmul_transpose_b(const RealMatrix& a, const RealMatrix& b);
/// a^T * b.
RealMatrix matmul_transpose_a(const RealMatrix& a, const RealMatrix& b);
/// out += a^T * b.
void matmul_transpose_a_accumulate(const RealMatrix& a, const RealMatrix& b, RealMatrix& out);

RealMatrix transpose(const RealMatrix& m);

/// Rows of `m` selected by `indices`, in that order.
RealMatrix gather_rows(const RealMatrix& m, std::span<const std::size_t> indices);

std::vector<double> column_means(const RealMatrix& m);

/// Throws ShapeError unless both matrices have the same shape.
void require_same_shape(const RealMatrix& a, const RealMatrix& b, const char* what);

}  // namespace nashae
