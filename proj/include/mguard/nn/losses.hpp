#pragma once

#include "mguard/nn/types.hpp"

namespace mguard {

template <typename Scalar>
struct LossResult {
  double value = 0.0;
  Matrix<Scalar> grad;  // dL/d(first argument), same shape
};

inline constexpr double kBceEpsilon = 1e-7;

/// Mean binary cross-entropy. Predictions are clamped to [eps, 1 - eps]
/// before the log; the gradient is zero where the clamp is active.
/// Targets may be soft; throws DataError if one lies outside [0, 1].
template <typename Scalar>
LossResult<Scalar> bce_loss(const Eigen::Ref<const Matrix<Scalar>>& predictions,
                            const Eigen::Ref<const Matrix<Scalar>>& targets, double epsilon = kBceEpsilon);

/// BCE gradient taken with respect to the pre-sigmoid logits:
/// (sigmoid(a) - t) / n. Never vanishes under saturation.
template <typename Scalar>
Matrix<Scalar> bce_logit_grad(const Eigen::Ref<const Matrix<Scalar>>& predictions,
                              const Eigen::Ref<const Matrix<Scalar>>& targets);

/// Sum of absolute differences; gradient sign(a - b) w.r.t. `a`, 0 at ties.
template <typename Scalar>
LossResult<Scalar> l1_loss(const Eigen::Ref<const Matrix<Scalar>>& a, const Eigen::Ref<const Matrix<Scalar>>& b);

/// Column-wise L1 distances, [1, cols], accumulated in double.
template <typename Scalar>
Vector<double> l1_per_column(const Eigen::Ref<const Matrix<Scalar>>& a, const Eigen::Ref<const Matrix<Scalar>>& b);

/// Elementwise sign with sign(0) = 0.
template <typename Scalar>
Matrix<Scalar> l1_subgradient(const Eigen::Ref<const Matrix<Scalar>>& a, const Eigen::Ref<const Matrix<Scalar>>& b);

}  // namespace mguard
