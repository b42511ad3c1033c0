#include "mguard/nn/adam.hpp"

#include "mguard/error.hpp"

#include <cmath>

namespace mguard {

template <typename Scalar>
void adam_step(const AdamConfig& config, AdamState<Scalar>& state, Eigen::Map<Matrix<Scalar>> param,
               const Eigen::Ref<const Matrix<Scalar>>& grad) {
  expect_dim("adam grad rows", param.rows(), grad.rows());
  expect_dim("adam grad cols", param.cols(), grad.cols());
  if (state.m.size() == 0) {
    state.m = Matrix<Scalar>::Zero(param.rows(), param.cols());
    state.v = Matrix<Scalar>::Zero(param.rows(), param.cols());
  }
  expect_dim("adam moment rows", param.rows(), state.m.rows());
  expect_dim("adam moment cols", param.cols(), state.m.cols());

  ++state.step_count;
  const auto b1 = static_cast<Scalar>(config.beta1);
  const auto b2 = static_cast<Scalar>(config.beta2);
  state.m = b1 * state.m + (Scalar(1) - b1) * grad;
  state.v = b2 * state.v + (Scalar(1) - b2) * grad.cwiseProduct(grad);

  const double t = static_cast<double>(state.step_count);
  const auto m_scale = static_cast<Scalar>(1.0 / (1.0 - std::pow(config.beta1, t)));
  const auto v_scale = static_cast<Scalar>(1.0 / (1.0 - std::pow(config.beta2, t)));
  const auto alpha = static_cast<Scalar>(config.alpha);
  const auto eps = static_cast<Scalar>(config.epsilon);
  param.array() -= alpha * (state.m.array() * m_scale) / ((state.v.array() * v_scale).sqrt() + eps);
}

template <typename Scalar>
void AdamOptimizer<Scalar>::step(std::span<const ParamRef<Scalar>> params, std::span<const ParamRef<Scalar>> grads) {
  expect_dim("optimizer parameter blocks", static_cast<long>(params.size()), static_cast<long>(grads.size()));
  if (states_.empty()) states_.resize(params.size());
  expect_dim("optimizer state blocks", static_cast<long>(params.size()), static_cast<long>(states_.size()));
  for (std::size_t i = 0; i < params.size(); ++i) {
    adam_step<Scalar>(config_, states_[i], params[i].map(), grads[i].map());
  }
}

template void adam_step(const AdamConfig&, AdamState<float>&, Eigen::Map<Matrix<float>>,
                        const Eigen::Ref<const Matrix<float>>&);
template void adam_step(const AdamConfig&, AdamState<double>&, Eigen::Map<Matrix<double>>,
                        const Eigen::Ref<const Matrix<double>>&);
template class AdamOptimizer<float>;
template class AdamOptimizer<double>;

}  // namespace mguard
