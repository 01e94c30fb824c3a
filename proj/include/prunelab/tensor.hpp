#pragma once

#include <Eigen/Dense>
#include <initializer_list>
#include <numeric>
#include <utility>
#include <vector>

#include "prunelab/common.hpp"

namespace prunelab {

/// Dense n-dimensional array, row-major, contiguous. Heavy math goes through
/// Eigen views (array() for elementwise, matrix maps for GEMM); indexing
/// helpers are for the loop-based kernels in tensor_ops.hpp.
template <typename Scalar_>
class TensorT {
 public:
  using Scalar = Scalar_;
  using Array = Eigen::Array<Scalar, Eigen::Dynamic, 1>;
  using MatrixMap =
      Eigen::Map<Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;
  using ConstMatrixMap =
      Eigen::Map<const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;

  TensorT() = default;

  explicit TensorT(std::vector<Index> shape) : shape_(std::move(shape)) {
    data_ = Array::Zero(checked_size(shape_));
  }

  static TensorT zeros(std::vector<Index> shape) { return TensorT(std::move(shape)); }

  static TensorT constant(std::vector<Index> shape, Scalar value) {
    TensorT t(std::move(shape));
    t.data_.setConstant(value);
    return t;
  }

  static TensorT from(std::vector<Index> shape, std::initializer_list<Scalar> values) {
    TensorT t(std::move(shape));
    require(static_cast<Index>(values.size()) == t.size(),
            "tensor literal size does not match shape");
    Index i = 0;
    for (Scalar v : values) t.data_[i++] = v;
    return t;
  }

  const std::vector<Index>& shape() const { return shape_; }
  Index rank() const { return static_cast<Index>(shape_.size()); }
  Index extent(Index axis) const { return shape_[static_cast<std::size_t>(axis)]; }
  Index size() const { return data_.size(); }

  Scalar* data() { return data_.data(); }
  const Scalar* data() const { return data_.data(); }

  Array& array() { return data_; }
  const Array& array() const { return data_; }

  Scalar& operator[](Index i) { return data_[i]; }
  Scalar operator[](Index i) const { return data_[i]; }

  /// Linear offset of (i0, i1, ...) under row-major layout.
  Index offset(std::initializer_list<Index> idx) const {
    Index off = 0;
    std::size_t k = 0;
    for (Index i : idx) {
      off = off * shape_[k] + i;
      ++k;
    }
    return off;
  }

  Scalar& at(std::initializer_list<Index> idx) { return data_[offset(idx)]; }
  Scalar at(std::initializer_list<Index> idx) const { return data_[offset(idx)]; }

  bool all_finite() const { return data_.isFinite().all(); }

  bool same_shape(const TensorT& other) const { return shape_ == other.shape_; }

  /// Reshape without copying; product of extents must be preserved.
  TensorT reshaped(std::vector<Index> shape) const {
    require(checked_size(shape) == size(), "reshape changes element count");
    TensorT t;
    t.shape_ = std::move(shape);
    t.data_ = data_;
    return t;
  }

  /// View rows x cols over the flat buffer (rows*cols must equal size()).
  MatrixMap matrix(Index rows, Index cols) {
    require(rows * cols == size(), "matrix view size mismatch");
    return MatrixMap(data_.data(), rows, cols);
  }
  ConstMatrixMap matrix(Index rows, Index cols) const {
    require(rows * cols == size(), "matrix view size mismatch");
    return ConstMatrixMap(data_.data(), rows, cols);
  }

 private:
  static Index checked_size(const std::vector<Index>& shape) {
    Index n = 1;
    for (Index e : shape) {
      require(e >= 0, "negative tensor extent");
      n *= e;
    }
    return n;
  }

  std::vector<Index> shape_;
  Array data_;
};

using Tensor = TensorT<double>;

}  // namespace prunelab
