#pragma once

#include "mguard/nn/types.hpp"

#include <vector>

namespace mguard {

class Rng;

/// Affine layer y = W x + b applied column-wise to a batch [in, N].
template <typename Scalar>
struct DenseLayer {
  Matrix<Scalar> W;  // [out, in]
  Vector<Scalar> b;  // [out]

  Index input_size() const { return W.cols(); }
  Index output_size() const { return W.rows(); }

  static DenseLayer zeros(Index input_size, Index output_size);

  /// W ~ U(-1/sqrt(in), 1/sqrt(in)), b = 0.
  static DenseLayer initialized(Index input_size, Index output_size, Rng& rng);

  template <typename Other>
  DenseLayer<Other> cast() const {
    return {W.template cast<Other>(), b.template cast<Other>()};
  }

  void append_params(std::vector<ParamRef<Scalar>>& out, const std::string& prefix);
};

template <typename Scalar>
Matrix<Scalar> dense_forward(const DenseLayer<Scalar>& layer, const Eigen::Ref<const Matrix<Scalar>>& x);

template <typename Scalar>
struct DenseGradients {
  DenseLayer<Scalar> params;
  Matrix<Scalar> input;
};

/// Gradients of a scalar loss given dL/dy for the batch `x` that produced y.
template <typename Scalar>
DenseGradients<Scalar> dense_backward(const DenseLayer<Scalar>& layer, const Eigen::Ref<const Matrix<Scalar>>& x,
                                      const Eigen::Ref<const Matrix<Scalar>>& grad_output,
                                      bool param_grads = true);

}  // namespace mguard
