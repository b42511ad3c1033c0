#include "mguard/model/discriminator.hpp"

#include "mguard/error.hpp"
#include "mguard/nn/activations.hpp"
#include "mguard/nn/rng.hpp"

namespace mguard {

template <typename Scalar>
Matrix<Scalar> sequences_to_row(const Eigen::Ref<const Matrix<Scalar>>& sequences) {
  const Matrix<Scalar> transposed = sequences.transpose();  // [B, T]: index j + t*B
  return Eigen::Map<const Matrix<Scalar>>(transposed.data(), 1, transposed.size());
}

template <typename Scalar>
Matrix<Scalar> row_to_sequences(const Eigen::Ref<const Matrix<Scalar>>& row, Index batch) {
  expect_dim("sequence row count", 1, row.rows());
  if (batch < 1 || row.cols() % batch != 0) throw ShapeError("sequence batch", batch, row.cols());
  const Matrix<Scalar> contiguous = row;
  return Eigen::Map<const Matrix<Scalar>>(contiguous.data(), batch, row.cols() / batch).transpose();
}

template <typename Scalar>
Discriminator<Scalar> Discriminator<Scalar>::zeros(const ModelConfig& config) {
  config.validate();
  return {LstmLayer<Scalar>::zeros(1, config.discriminator_hidden),
          DenseLayer<Scalar>::zeros(config.discriminator_hidden, 1)};
}

template <typename Scalar>
Discriminator<Scalar> Discriminator<Scalar>::initialized(const ModelConfig& config, Rng& rng) {
  config.validate();
  auto lstm = LstmLayer<Scalar>::initialized(1, config.discriminator_hidden, rng);
  auto out = DenseLayer<Scalar>::initialized(config.discriminator_hidden, 1, rng);
  return {std::move(lstm), std::move(out)};
}

template <typename Scalar>
std::vector<ParamRef<Scalar>> Discriminator<Scalar>::parameters() {
  std::vector<ParamRef<Scalar>> refs;
  lstm.append_params(refs, "discriminator.lstm");
  out.append_params(refs, "discriminator.out");
  return refs;
}

template <typename Scalar>
Index Discriminator<Scalar>::parameter_count() const {
  return lstm.W.size() + lstm.U.size() + lstm.b.size() + out.W.size() + out.b.size();
}

template <typename Scalar>
DiscriminatorOutput<Scalar> discriminate(const Discriminator<Scalar>& discriminator,
                                         const Eigen::Ref<const Matrix<Scalar>>& x, bool keep_cache) {
  const Index B = x.cols();
  if (B < 1 || x.rows() < 1) throw ShapeError("discriminator input", 1, x.size());
  DiscriminatorOutput<Scalar> result;
  const Matrix<Scalar> row = sequences_to_row<Scalar>(x);
  result.features = lstm_forward<Scalar>(discriminator.lstm, row, B, {}, {}, keep_cache ? &result.cache : nullptr);
  result.logits = dense_forward<Scalar>(discriminator.out, result.features.rightCols(B));
  result.scores = sigmoid(result.logits);
  return result;
}

template <typename Scalar>
DiscriminatorGradients<Scalar> discriminator_backward(const Discriminator<Scalar>& discriminator,
                                                      const DiscriminatorOutput<Scalar>& forward,
                                                      const Eigen::Ref<const Matrix<Scalar>>& grad_logits,
                                                      const Matrix<Scalar>& grad_features, bool param_grads) {
  const Index B = forward.logits.cols();
  const Index T = forward.cache.steps;
  if (T == 0) throw ShapeError("discriminator cache steps (forward run without keep_cache?)", 1, 0);
  expect_dim("discriminator grad logits cols", B, grad_logits.cols());

  Matrix<Scalar> grad_hidden = grad_features.size() == 0 ? Matrix<Scalar>::Zero(forward.features.rows(), T * B)
                                                         : grad_features;
  expect_dim("discriminator grad feature rows", forward.features.rows(), grad_hidden.rows());
  expect_dim("discriminator grad feature cols", T * B, grad_hidden.cols());

  DiscriminatorGradients<Scalar> grads;
  auto dense = dense_backward<Scalar>(discriminator.out, forward.features.rightCols(B), grad_logits, param_grads);
  grad_hidden.rightCols(B) += dense.input;
  auto lstm = lstm_backward<Scalar>(discriminator.lstm, forward.cache, grad_hidden, param_grads);
  if (param_grads) {
    grads.params.lstm = std::move(lstm.params);
    grads.params.out = std::move(dense.params);
  }
  grads.input = row_to_sequences<Scalar>(lstm.inputs, B);
  return grads;
}

template <typename Scalar>
WindowDiscrimination<Scalar> discriminate_window(const Discriminator<Scalar>& discriminator,
                                                 const Eigen::Ref<const Vector<Scalar>>& x) {
  const auto out = discriminate<Scalar>(discriminator, x);
  return {out.scores(0, 0), out.features.transpose()};
}

#define MGUARD_INSTANTIATE_DISCRIMINATOR(S)                                                                    \
  template struct Discriminator<S>;                                                                            \
  template Matrix<S> sequences_to_row(const Eigen::Ref<const Matrix<S>>&);                                     \
  template Matrix<S> row_to_sequences(const Eigen::Ref<const Matrix<S>>&, Index);                              \
  template DiscriminatorOutput<S> discriminate(const Discriminator<S>&, const Eigen::Ref<const Matrix<S>>&,    \
                                               bool);                                                          \
  template DiscriminatorGradients<S> discriminator_backward(const Discriminator<S>&,                           \
                                                            const DiscriminatorOutput<S>&,                     \
                                                            const Eigen::Ref<const Matrix<S>>&,                \
                                                            const Matrix<S>&, bool);                           \
  template WindowDiscrimination<S> discriminate_window(const Discriminator<S>&, const Eigen::Ref<const Vector<S>>&);

MGUARD_INSTANTIATE_DISCRIMINATOR(float)
MGUARD_INSTANTIATE_DISCRIMINATOR(double)

}  // namespace mguard
