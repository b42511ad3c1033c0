#pragma once

#include <Eigen/Core>

#include <cmath>
#include <concepts>

namespace mguard {

// Elementwise activations over Eigen arrays/matrices; tanh is Eigen's own
// .tanh(). The derivative helpers take the activation *output*, which is
// what the backward passes cache.

template <typename Derived>
auto sigmoid(const Eigen::ArrayBase<Derived>& x) {
  using Scalar = typename Derived::Scalar;
  return (Scalar(1) + (-x).exp()).inverse();
}

template <typename Derived>
auto sigmoid(const Eigen::MatrixBase<Derived>& x) {
  return sigmoid(x.array()).matrix();
}

/// d sigmoid / dx expressed through y = sigmoid(x).
template <typename Derived>
auto sigmoid_grad_from_output(const Eigen::ArrayBase<Derived>& y) {
  using Scalar = typename Derived::Scalar;
  return y * (Scalar(1) - y);
}

/// d tanh / dx expressed through y = tanh(x).
template <typename Derived>
auto tanh_grad_from_output(const Eigen::ArrayBase<Derived>& y) {
  using Scalar = typename Derived::Scalar;
  return Scalar(1) - y.square();
}

template <std::floating_point Scalar>
Scalar sigmoid(Scalar x) {
  return Scalar(1) / (Scalar(1) + std::exp(-x));
}

}  // namespace mguard
