#pragma once

#include "mguard/nn/types.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace mguard {

struct AdamConfig {
  double alpha = 2e-4;
  double beta1 = 0.5;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// First/second moment estimates for one parameter block.
template <typename Scalar>
struct AdamState {
  std::int64_t step_count = 0;
  Matrix<Scalar> m;
  Matrix<Scalar> v;
};

/// One bias-corrected Adam update of `param` in place. Moments are lazily
/// sized on the first call. Throws ShapeError on mismatched shapes.
template <typename Scalar>
void adam_step(const AdamConfig& config, AdamState<Scalar>& state, Eigen::Map<Matrix<Scalar>> param,
               const Eigen::Ref<const Matrix<Scalar>>& grad);

template <typename Scalar>
void adam_step(const AdamConfig& config, AdamState<Scalar>& state, Matrix<Scalar>& param,
               const Eigen::Ref<const Matrix<Scalar>>& grad) {
  adam_step(config, state, Eigen::Map<Matrix<Scalar>>(param.data(), param.rows(), param.cols()), grad);
}

/// Adam over every block of a model, matched by position.
template <typename Scalar>
class AdamOptimizer {
 public:
  AdamOptimizer() = default;
  explicit AdamOptimizer(AdamConfig config) : config_(config) {}

  const AdamConfig& config() const { return config_; }
  std::span<const AdamState<Scalar>> states() const { return states_; }
  std::vector<AdamState<Scalar>>& mutable_states() { return states_; }

  void step(std::span<const ParamRef<Scalar>> params, std::span<const ParamRef<Scalar>> grads);

 private:
  AdamConfig config_;
  std::vector<AdamState<Scalar>> states_;
};

}  // namespace mguard
