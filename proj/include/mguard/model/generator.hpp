#pragma once

#include "mguard/model/config.hpp"
#include "mguard/nn/dense.hpp"
#include "mguard/nn/lstm.hpp"

#include <vector>

namespace mguard {

class Rng;

/// Stacked-LSTM generator. The latent code is fed as the input at every time
/// step of the first layer; a dense layer shared across time steps maps the
/// last layer's hidden state to one Tanh-squashed value per step.
template <typename Scalar>
struct Generator {
  std::vector<LstmLayer<Scalar>> lstm;
  DenseLayer<Scalar> out;
  Index window_length = 0;

  Index latent_dim() const { return lstm.empty() ? 0 : lstm.front().input_size(); }

  /// All-zero parameters.
  static Generator zeros(const ModelConfig& config);
  static Generator initialized(const ModelConfig& config, Rng& rng);

  template <typename Other>
  Generator<Other> cast() const {
    Generator<Other> g;
    for (const auto& layer : lstm) g.lstm.push_back(layer.template cast<Other>());
    g.out = out.template cast<Other>();
    g.window_length = window_length;
    return g;
  }

  /// Blocks named generator.lstm{k}.{W,U,b} and generator.out.{W,b}.
  std::vector<ParamRef<Scalar>> parameters();
  Index parameter_count() const;
};

template <typename Scalar>
struct GeneratorCache {
  Index batch = 0;
  std::vector<LstmCache<Scalar>> lstm;
  Matrix<Scalar> output_row;  // [1, T*B], post-tanh
};

template <typename Scalar>
struct GeneratorGradients {
  Generator<Scalar> params;  // empty when not requested
  Matrix<Scalar> latent;     // [latent_dim, B]
};

/// z: [latent_dim, B] -> sequences [window_length, B], values in (-1, 1).
template <typename Scalar>
Matrix<Scalar> generate(const Generator<Scalar>& generator, const Eigen::Ref<const Matrix<Scalar>>& z,
                        GeneratorCache<Scalar>* cache = nullptr);

/// grad_output: dL/d(generated sequences), [window_length, B].
template <typename Scalar>
GeneratorGradients<Scalar> generator_backward(const Generator<Scalar>& generator, const GeneratorCache<Scalar>& cache,
                                              const Eigen::Ref<const Matrix<Scalar>>& grad_output,
                                              bool param_grads = true);

}  // namespace mguard
