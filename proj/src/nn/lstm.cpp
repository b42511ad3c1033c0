#include "mguard/nn/lstm.hpp"

#include "mguard/error.hpp"
#include "mguard/nn/activations.hpp"
#include "mguard/nn/rng.hpp"

#include <cmath>

namespace mguard {

template <typename Scalar>
LstmLayer<Scalar> LstmLayer<Scalar>::zeros(Index input_size, Index hidden_size) {
  return {Matrix<Scalar>::Zero(4 * hidden_size, input_size), Matrix<Scalar>::Zero(4 * hidden_size, hidden_size),
          Vector<Scalar>::Zero(4 * hidden_size)};
}

template <typename Scalar>
LstmLayer<Scalar> LstmLayer<Scalar>::initialized(Index input_size, Index hidden_size, Rng& rng) {
  const auto bound = static_cast<Scalar>(1.0 / std::sqrt(static_cast<double>(hidden_size)));
  LstmLayer layer;
  layer.W = sample_uniform<Scalar>(rng, -bound, bound, 4 * hidden_size, input_size);
  layer.U = sample_uniform<Scalar>(rng, -bound, bound, 4 * hidden_size, hidden_size);
  layer.b = Vector<Scalar>::Zero(4 * hidden_size);
  layer.b.segment(hidden_size, hidden_size).setOnes();
  return layer;
}

template <typename Scalar>
void LstmLayer<Scalar>::validate() const {
  const Index h = hidden_size();
  expect_dim("lstm U rows", 4 * h, U.rows());
  expect_dim("lstm W rows", 4 * h, W.rows());
  expect_dim("lstm b rows", 4 * h, b.rows());
}

template <typename Scalar>
void LstmLayer<Scalar>::append_params(std::vector<ParamRef<Scalar>>& out, const std::string& prefix) {
  out.push_back({prefix + ".W", W.data(), W.rows(), W.cols()});
  out.push_back({prefix + ".U", U.data(), U.rows(), U.cols()});
  out.push_back({prefix + ".b", b.data(), b.rows(), 1});
}

template <typename Scalar>
Matrix<Scalar> lstm_forward(const LstmLayer<Scalar>& layer, const Eigen::Ref<const Matrix<Scalar>>& inputs,
                            Index batch, const Matrix<Scalar>& h0, const Matrix<Scalar>& c0,
                            LstmCache<Scalar>* cache) {
  layer.validate();
  const Index H = layer.hidden_size();
  expect_dim("lstm input rows", layer.input_size(), inputs.rows());
  if (batch < 1) throw ShapeError("lstm batch", 1, batch);
  if (inputs.cols() == 0 || inputs.cols() % batch != 0) {
    throw ShapeError("lstm input columns (steps*batch)", batch, inputs.cols());
  }
  const Index T = inputs.cols() / batch;

  Matrix<Scalar> h_init = h0.size() == 0 ? Matrix<Scalar>::Zero(H, batch) : h0;
  Matrix<Scalar> c_init = c0.size() == 0 ? Matrix<Scalar>::Zero(H, batch) : c0;
  expect_dim("lstm h0 rows", H, h_init.rows());
  expect_dim("lstm h0 cols", batch, h_init.cols());
  expect_dim("lstm c0 rows", H, c_init.rows());
  expect_dim("lstm c0 cols", batch, c_init.cols());

  Matrix<Scalar> gates(4 * H, T * batch);
  gates.noalias() = layer.W * inputs;
  gates.colwise() += layer.b;
  Matrix<Scalar> cells(H, T * batch);
  Matrix<Scalar> cell_tanh(H, T * batch);
  Matrix<Scalar> hidden(H, T * batch);

  for (Index t = 0; t < T; ++t) {
    auto z = gates.middleCols(t * batch, batch);
    if (t == 0) {
      z.noalias() += layer.U * h_init;
    } else {
      z.noalias() += layer.U * hidden.middleCols((t - 1) * batch, batch);
    }
    auto a = z.array();
    a.topRows(2 * H) = sigmoid(a.topRows(2 * H).eval());
    a.middleRows(2 * H, H) = a.middleRows(2 * H, H).tanh();
    a.bottomRows(H) = sigmoid(a.bottomRows(H).eval());

    using ConstRef = Eigen::Ref<const Matrix<Scalar>>;
    const ConstRef c_prev = t == 0 ? ConstRef(c_init) : ConstRef(cells.middleCols((t - 1) * batch, batch));
    auto c = cells.middleCols(t * batch, batch).array();
    c = a.middleRows(H, H) * c_prev.array() + a.topRows(H) * a.middleRows(2 * H, H);
    auto tc = cell_tanh.middleCols(t * batch, batch).array();
    tc = c.tanh();
    hidden.middleCols(t * batch, batch).array() = a.bottomRows(H) * tc;
  }

  if (cache != nullptr) {
    cache->steps = T;
    cache->batch = batch;
    cache->inputs = inputs;
    cache->gates = std::move(gates);
    cache->cells = std::move(cells);
    cache->cell_tanh = std::move(cell_tanh);
    cache->h0 = std::move(h_init);
    cache->c0 = std::move(c_init);
    cache->hidden = hidden;
  }
  return hidden;
}

template <typename Scalar>
LstmGradients<Scalar> lstm_backward(const LstmLayer<Scalar>& layer, const LstmCache<Scalar>& cache,
                                    const Eigen::Ref<const Matrix<Scalar>>& grad_hidden, bool param_grads) {
  const Index H = layer.hidden_size();
  const Index T = cache.steps;
  const Index B = cache.batch;
  if (T == 0) throw ShapeError("lstm cache steps", 1, 0);
  expect_dim("lstm cache hidden rows", H, cache.hidden.rows());
  expect_dim("lstm grad rows", H, grad_hidden.rows());
  expect_dim("lstm grad columns", T * B, grad_hidden.cols());

  Matrix<Scalar> d_gates(4 * H, T * B);
  Matrix<Scalar> dh_next = Matrix<Scalar>::Zero(H, B);
  Matrix<Scalar> dc_next = Matrix<Scalar>::Zero(H, B);
  Matrix<Scalar> dh(H, B);
  Matrix<Scalar> dc(H, B);

  for (Index t = T - 1; t >= 0; --t) {
    const auto cols = [&](const Matrix<Scalar>& m) { return m.middleCols(t * B, B).array(); };
    const auto g = cols(cache.gates);
    const auto in = g.topRows(H);
    const auto fg = g.middleRows(H, H);
    const auto cg = g.middleRows(2 * H, H);
    const auto out = g.bottomRows(H);
    const auto tc = cols(cache.cell_tanh);
    using ConstRef = Eigen::Ref<const Matrix<Scalar>>;
    const ConstRef c_prev_ref = t == 0 ? ConstRef(cache.c0) : ConstRef(cache.cells.middleCols((t - 1) * B, B));
    const auto c_prev = c_prev_ref.array();

    dh.array() = grad_hidden.middleCols(t * B, B).array() + dh_next.array();
    dc.array() = dc_next.array() + dh.array() * out * tanh_grad_from_output(tc);

    auto dg = d_gates.middleCols(t * B, B).array();
    dg.topRows(H) = dc.array() * cg * sigmoid_grad_from_output(in);
    dg.middleRows(H, H) = dc.array() * c_prev * sigmoid_grad_from_output(fg);
    dg.middleRows(2 * H, H) = dc.array() * in * tanh_grad_from_output(cg);
    dg.bottomRows(H) = dh.array() * tc * sigmoid_grad_from_output(out);

    dh_next.noalias() = layer.U.transpose() * d_gates.middleCols(t * B, B);
    dc_next.array() = dc.array() * fg;
  }

  LstmGradients<Scalar> grads;
  if (param_grads) {
    grads.params.W.noalias() = d_gates * cache.inputs.transpose();
    grads.params.U.noalias() = d_gates.leftCols(B) * cache.h0.transpose();
    if (T > 1) {
      grads.params.U.noalias() += d_gates.rightCols((T - 1) * B) * cache.hidden.leftCols((T - 1) * B).transpose();
    }
    grads.params.b = d_gates.rowwise().sum();
  }
  grads.inputs.noalias() = layer.W.transpose() * d_gates;
  grads.h0 = std::move(dh_next);
  grads.c0 = std::move(dc_next);
  return grads;
}

template <typename Scalar>
Matrix<Scalar> lstm_forward_sequence(const LstmLayer<Scalar>& layer, const Eigen::Ref<const Matrix<Scalar>>& inputs) {
  const Matrix<Scalar> columns = inputs.transpose();
  return lstm_forward<Scalar>(layer, columns, 1).transpose();
}

#define MGUARD_INSTANTIATE_LSTM(S)                                                                               \
  template struct LstmLayer<S>;                                                                                  \
  template Matrix<S> lstm_forward(const LstmLayer<S>&, const Eigen::Ref<const Matrix<S>>&, Index,               \
                                  const Matrix<S>&, const Matrix<S>&, LstmCache<S>*);                           \
  template LstmGradients<S> lstm_backward(const LstmLayer<S>&, const LstmCache<S>&,                             \
                                          const Eigen::Ref<const Matrix<S>>&, bool);                            \
  template Matrix<S> lstm_forward_sequence(const LstmLayer<S>&, const Eigen::Ref<const Matrix<S>>&);

MGUARD_INSTANTIATE_LSTM(float)
MGUARD_INSTANTIATE_LSTM(double)

}  // namespace mguard
