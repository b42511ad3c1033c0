#pragma once

#include "mguard/model/config.hpp"
#include "mguard/nn/dense.hpp"
#include "mguard/nn/lstm.hpp"

#include <vector>

namespace mguard {

class Rng;

/// Single LSTM layer over the univariate sequence, then a dense + sigmoid
/// read-out of the last hidden state. The full hidden-state sequence is the
/// feature representation f_D(x) used by the anomaly score.
template <typename Scalar>
struct Discriminator {
  LstmLayer<Scalar> lstm;
  DenseLayer<Scalar> out;

  Index hidden_size() const { return lstm.hidden_size(); }

  static Discriminator zeros(const ModelConfig& config);
  static Discriminator initialized(const ModelConfig& config, Rng& rng);

  template <typename Other>
  Discriminator<Other> cast() const {
    return {lstm.template cast<Other>(), out.template cast<Other>()};
  }

  /// Blocks named discriminator.lstm.{W,U,b} and discriminator.out.{W,b}.
  std::vector<ParamRef<Scalar>> parameters();
  Index parameter_count() const;
};

template <typename Scalar>
struct DiscriminatorOutput {
  Matrix<Scalar> logits;    // [1, B]
  Matrix<Scalar> scores;    // [1, B], sigmoid(logits)
  Matrix<Scalar> features;  // [H, T*B], column t*B + j
  LstmCache<Scalar> cache;  // filled only when requested
};

template <typename Scalar>
struct DiscriminatorGradients {
  Discriminator<Scalar> params;  // empty when not requested
  Matrix<Scalar> input;          // [T, B]
};

/// x: sequences [T, B].
template <typename Scalar>
DiscriminatorOutput<Scalar> discriminate(const Discriminator<Scalar>& discriminator,
                                         const Eigen::Ref<const Matrix<Scalar>>& x, bool keep_cache = false);

/// Backward from dL/dlogits [1, B] and, optionally, dL/dfeatures [H, T*B]
/// (pass an empty matrix for none).
template <typename Scalar>
DiscriminatorGradients<Scalar> discriminator_backward(const Discriminator<Scalar>& discriminator,
                                                      const DiscriminatorOutput<Scalar>& forward,
                                                      const Eigen::Ref<const Matrix<Scalar>>& grad_logits,
                                                      const Matrix<Scalar>& grad_features, bool param_grads = true);

/// Score and features of one window; features laid out [T, H].
template <typename Scalar>
struct WindowDiscrimination {
  Scalar score;
  Matrix<Scalar> features;
};

template <typename Scalar>
WindowDiscrimination<Scalar> discriminate_window(const Discriminator<Scalar>& discriminator,
                                                 const Eigen::Ref<const Vector<Scalar>>& x);

/// Rearranges between [T, B] sequences and the [1, T*B] time-major row
/// layout used inside the recurrent layers.
template <typename Scalar>
Matrix<Scalar> sequences_to_row(const Eigen::Ref<const Matrix<Scalar>>& sequences);

template <typename Scalar>
Matrix<Scalar> row_to_sequences(const Eigen::Ref<const Matrix<Scalar>>& row, Index batch);

}  // namespace mguard
