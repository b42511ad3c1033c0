#include "mguard/nn/losses.hpp"

#include "mguard/error.hpp"
#include "mguard/nn/activations.hpp"

#include <algorithm>
#include <cmath>

namespace mguard {

namespace {

template <typename Scalar>
void expect_same_shape(const char* what, const Eigen::Ref<const Matrix<Scalar>>& a,
                       const Eigen::Ref<const Matrix<Scalar>>& b) {
  expect_dim((std::string(what) + " rows").c_str(), a.rows(), b.rows());
  expect_dim((std::string(what) + " cols").c_str(), a.cols(), b.cols());
}

template <typename Scalar>
void expect_unit_targets(const Eigen::Ref<const Matrix<Scalar>>& targets) {
  for (Index j = 0; j < targets.cols(); ++j) {
    for (Index i = 0; i < targets.rows(); ++i) {
      const Scalar t = targets(i, j);
      if (!(t >= Scalar(0) && t <= Scalar(1))) {
        throw DataError("bce target must lie in [0, 1], got " + std::to_string(static_cast<double>(t)));
      }
    }
  }
}

}  // namespace

template <typename Scalar>
LossResult<Scalar> bce_loss(const Eigen::Ref<const Matrix<Scalar>>& predictions,
                            const Eigen::Ref<const Matrix<Scalar>>& targets, double epsilon) {
  expect_same_shape<Scalar>("bce", predictions, targets);
  expect_unit_targets<Scalar>(targets);
  if (predictions.size() == 0) throw ShapeError("bce elements", 1, 0);

  const double n = static_cast<double>(predictions.size());
  LossResult<Scalar> result;
  result.grad.resize(predictions.rows(), predictions.cols());
  double total = 0.0;
  for (Index j = 0; j < predictions.cols(); ++j) {
    for (Index i = 0; i < predictions.rows(); ++i) {
      const double raw = static_cast<double>(predictions(i, j));
      const double p = std::clamp(raw, epsilon, 1.0 - epsilon);
      const double t = static_cast<double>(targets(i, j));
      total -= t * std::log(p) + (1.0 - t) * std::log(1.0 - p);
      const bool clamped = raw < epsilon || raw > 1.0 - epsilon;
      result.grad(i, j) = clamped ? Scalar(0) : static_cast<Scalar>((p - t) / (p * (1.0 - p)) / n);
    }
  }
  result.value = total / n;
  return result;
}

template <typename Scalar>
Matrix<Scalar> bce_logit_grad(const Eigen::Ref<const Matrix<Scalar>>& predictions,
                              const Eigen::Ref<const Matrix<Scalar>>& targets) {
  expect_same_shape<Scalar>("bce", predictions, targets);
  return (predictions - targets) / static_cast<Scalar>(predictions.size());
}

template <typename Scalar>
LossResult<Scalar> l1_loss(const Eigen::Ref<const Matrix<Scalar>>& a, const Eigen::Ref<const Matrix<Scalar>>& b) {
  expect_same_shape<Scalar>("l1", a, b);
  LossResult<Scalar> result;
  result.value = (a - b).template cast<double>().cwiseAbs().sum();
  result.grad = l1_subgradient<Scalar>(a, b);
  return result;
}

template <typename Scalar>
Vector<double> l1_per_column(const Eigen::Ref<const Matrix<Scalar>>& a, const Eigen::Ref<const Matrix<Scalar>>& b) {
  expect_same_shape<Scalar>("l1", a, b);
  return (a - b).template cast<double>().cwiseAbs().colwise().sum().transpose();
}

template <typename Scalar>
Matrix<Scalar> l1_subgradient(const Eigen::Ref<const Matrix<Scalar>>& a, const Eigen::Ref<const Matrix<Scalar>>& b) {
  expect_same_shape<Scalar>("l1", a, b);
  return (a - b).cwiseSign();
}

#define MGUARD_INSTANTIATE_LOSSES(S)                                                                           \
  template LossResult<S> bce_loss(const Eigen::Ref<const Matrix<S>>&, const Eigen::Ref<const Matrix<S>>&,      \
                                  double);                                                                     \
  template Matrix<S> bce_logit_grad(const Eigen::Ref<const Matrix<S>>&, const Eigen::Ref<const Matrix<S>>&);   \
  template LossResult<S> l1_loss(const Eigen::Ref<const Matrix<S>>&, const Eigen::Ref<const Matrix<S>>&);      \
  template Vector<double> l1_per_column(const Eigen::Ref<const Matrix<S>>&, const Eigen::Ref<const Matrix<S>>&); \
  template Matrix<S> l1_subgradient(const Eigen::Ref<const Matrix<S>>&, const Eigen::Ref<const Matrix<S>>&);

MGUARD_INSTANTIATE_LOSSES(float)
MGUARD_INSTANTIATE_LOSSES(double)

}  // namespace mguard
