#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <string>
#include <vector>

namespace mguard {

using Index = Eigen::Index;

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using MatrixF = Matrix<float>;
using VectorF = Vector<float>;
using MatrixD = Matrix<double>;
using VectorD = Vector<double>;

/// Mutable view of one named parameter block, used by optimizers,
/// serialization and gradient checking to walk a model generically.
template <typename Scalar>
struct ParamRef {
  std::string name;
  Scalar* data;
  Index rows;
  Index cols;

  Index size() const { return rows * cols; }
  Eigen::Map<Matrix<Scalar>> map() const { return {data, rows, cols}; }
};

template <typename Scalar>
struct ConstParamRef {
  std::string name;
  const Scalar* data;
  Index rows;
  Index cols;

  Index size() const { return rows * cols; }
  Eigen::Map<const Matrix<Scalar>> map() const { return {data, rows, cols}; }
};

/// Dense row-major float array with explicit dimensions. This is the
/// on-disk carrier for parameters; the math itself runs on Eigen types.
struct Tensor {
  std::vector<std::uint32_t> dims;
  std::vector<float> data;

  std::size_t element_count() const;
  std::size_t rank() const { return dims.size(); }

  /// Throws ShapeError when product(dims) != data.size().
  void validate() const;

  /// Rank-2 tensor [rows, cols] for matrices, rank-1 [rows] for column vectors.
  static Tensor from_matrix(const Eigen::Ref<const MatrixF>& m, bool as_vector = false);
  MatrixF to_matrix() const;

  friend bool operator==(const Tensor&, const Tensor&) = default;
};

}  // namespace mguard
