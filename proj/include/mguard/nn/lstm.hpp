#pragma once

#include "mguard/nn/types.hpp"

#include <vector>

namespace mguard {

class Rng;

/// Parameters of one LSTM layer.
///
/// The four gate blocks are stacked along the rows of W, U and b in the fixed
/// order (input, forget, cell, output); block k occupies rows
/// [k*hidden, (k+1)*hidden). The checkpoint format stores them in this order.
///
///   i = sigmoid(W_i x + U_i h + b_i)      f = sigmoid(W_f x + U_f h + b_f)
///   g = tanh(W_g x + U_g h + b_g)         o = sigmoid(W_o x + U_o h + b_o)
///   c' = f * c + i * g                    h' = o * tanh(c')
template <typename Scalar>
struct LstmLayer {
  Matrix<Scalar> W;  // [4H, I]
  Matrix<Scalar> U;  // [4H, H]
  Vector<Scalar> b;  // [4H]

  Index input_size() const { return W.cols(); }
  Index hidden_size() const { return U.cols(); }

  static LstmLayer zeros(Index input_size, Index hidden_size);

  /// W, U ~ U(-1/sqrt(H), 1/sqrt(H)); b = 0 except the forget block, which is 1.
  static LstmLayer initialized(Index input_size, Index hidden_size, Rng& rng);

  template <typename Other>
  LstmLayer<Other> cast() const {
    return {W.template cast<Other>(), U.template cast<Other>(), b.template cast<Other>()};
  }

  /// Throws ShapeError if W/U/b disagree with each other.
  void validate() const;

  void append_params(std::vector<ParamRef<Scalar>>& out, const std::string& prefix);
};

/// Everything the backward pass needs from a forward call.
///
/// Sequences are stored time-major in the columns of a [features, T*B]
/// matrix: column t*B + j is time step t of batch element j.
template <typename Scalar>
struct LstmCache {
  Index steps = 0;
  Index batch = 0;
  Matrix<Scalar> inputs;     // [I, T*B]
  Matrix<Scalar> gates;      // [4H, T*B], post-activation
  Matrix<Scalar> cells;      // [H, T*B]
  Matrix<Scalar> cell_tanh;  // [H, T*B]
  Matrix<Scalar> hidden;     // [H, T*B]
  Matrix<Scalar> h0;         // [H, B]
  Matrix<Scalar> c0;         // [H, B]
};

template <typename Scalar>
struct LstmGradients {
  LstmLayer<Scalar> params;  // empty when param gradients were not requested
  Matrix<Scalar> inputs;     // [I, T*B]
  Matrix<Scalar> h0;         // [H, B]
  Matrix<Scalar> c0;         // [H, B]
};

/// Runs the layer over a batch of sequences. Returns the hidden-state
/// sequence [H, T*B]. `h0`/`c0` may be empty, meaning zeros. When `cache` is
/// non-null it is filled for lstm_backward.
template <typename Scalar>
Matrix<Scalar> lstm_forward(const LstmLayer<Scalar>& layer, const Eigen::Ref<const Matrix<Scalar>>& inputs,
                            Index batch, const Matrix<Scalar>& h0 = {}, const Matrix<Scalar>& c0 = {},
                            LstmCache<Scalar>* cache = nullptr);

/// Full backpropagation through time for the loss implied by
/// `grad_hidden` = dL/d(hidden sequence), [H, T*B].
template <typename Scalar>
LstmGradients<Scalar> lstm_backward(const LstmLayer<Scalar>& layer, const LstmCache<Scalar>& cache,
                                    const Eigen::Ref<const Matrix<Scalar>>& grad_hidden, bool param_grads = true);

/// Single-sequence convenience: inputs [T, I] -> hidden states [T, H],
/// zero initial state.
template <typename Scalar>
Matrix<Scalar> lstm_forward_sequence(const LstmLayer<Scalar>& layer, const Eigen::Ref<const Matrix<Scalar>>& inputs);

}  // namespace mguard
