#include "mguard/model/generator.hpp"

#include "mguard/error.hpp"
#include "mguard/model/discriminator.hpp"
#include "mguard/nn/rng.hpp"

namespace mguard {

template <typename Scalar>
Generator<Scalar> Generator<Scalar>::zeros(const ModelConfig& config) {
  config.validate();
  Generator g;
  Index input = config.latent_dim;
  for (int h : config.generator_hidden) {
    g.lstm.push_back(LstmLayer<Scalar>::zeros(input, h));
    input = h;
  }
  g.out = DenseLayer<Scalar>::zeros(input, 1);
  g.window_length = config.window_length;
  return g;
}

template <typename Scalar>
Generator<Scalar> Generator<Scalar>::initialized(const ModelConfig& config, Rng& rng) {
  config.validate();
  Generator g;
  Index input = config.latent_dim;
  for (int h : config.generator_hidden) {
    g.lstm.push_back(LstmLayer<Scalar>::initialized(input, h, rng));
    input = h;
  }
  g.out = DenseLayer<Scalar>::initialized(input, 1, rng);
  g.window_length = config.window_length;
  return g;
}

template <typename Scalar>
std::vector<ParamRef<Scalar>> Generator<Scalar>::parameters() {
  std::vector<ParamRef<Scalar>> refs;
  for (std::size_t k = 0; k < lstm.size(); ++k) lstm[k].append_params(refs, "generator.lstm" + std::to_string(k));
  out.append_params(refs, "generator.out");
  return refs;
}

template <typename Scalar>
Index Generator<Scalar>::parameter_count() const {
  Index total = out.W.size() + out.b.size();
  for (const auto& layer : lstm) total += layer.W.size() + layer.U.size() + layer.b.size();
  return total;
}

template <typename Scalar>
Matrix<Scalar> generate(const Generator<Scalar>& generator, const Eigen::Ref<const Matrix<Scalar>>& z,
                        GeneratorCache<Scalar>* cache) {
  if (generator.lstm.empty()) throw ShapeError("generator layers", 1, 0);
  expect_dim("generator latent dimension", generator.latent_dim(), z.rows());
  const Index B = z.cols();
  const Index T = generator.window_length;
  if (B < 1) throw ShapeError("generator batch", 1, 0);

  if (cache != nullptr) {
    cache->batch = B;
    cache->lstm.assign(generator.lstm.size(), {});
  }
  Matrix<Scalar> sequence = z.replicate(1, T);
  for (std::size_t k = 0; k < generator.lstm.size(); ++k) {
    sequence = lstm_forward<Scalar>(generator.lstm[k], sequence, B, {}, {},
                                    cache != nullptr ? &cache->lstm[k] : nullptr);
  }
  Matrix<Scalar> row = dense_forward<Scalar>(generator.out, sequence);
  row = row.array().tanh().matrix();
  Matrix<Scalar> result = row_to_sequences<Scalar>(row, B);
  if (cache != nullptr) cache->output_row = std::move(row);
  return result;
}

template <typename Scalar>
GeneratorGradients<Scalar> generator_backward(const Generator<Scalar>& generator, const GeneratorCache<Scalar>& cache,
                                              const Eigen::Ref<const Matrix<Scalar>>& grad_output,
                                              bool param_grads) {
  const Index B = cache.batch;
  const Index T = generator.window_length;
  expect_dim("generator grad rows", T, grad_output.rows());
  expect_dim("generator grad cols", B, grad_output.cols());
  expect_dim("generator cache layers", static_cast<long>(generator.lstm.size()),
             static_cast<long>(cache.lstm.size()));

  const Matrix<Scalar> grad_row = sequences_to_row<Scalar>(grad_output);
  const Matrix<Scalar> grad_pre =
      (grad_row.array() * (Scalar(1) - cache.output_row.array().square())).matrix();

  GeneratorGradients<Scalar> grads;
  auto dense = dense_backward<Scalar>(generator.out, cache.lstm.back().hidden, grad_pre, param_grads);
  Matrix<Scalar> grad_hidden = std::move(dense.input);
  if (param_grads) {
    grads.params.lstm.resize(generator.lstm.size());
    grads.params.out = std::move(dense.params);
    grads.params.window_length = T;
  }
  for (std::size_t k = generator.lstm.size(); k-- > 0;) {
    auto layer = lstm_backward<Scalar>(generator.lstm[k], cache.lstm[k], grad_hidden, param_grads);
    if (param_grads) grads.params.lstm[k] = std::move(layer.params);
    grad_hidden = std::move(layer.inputs);
  }
  // The latent code is repeated at every step, so its gradient sums over time.
  grads.latent = Matrix<Scalar>::Zero(generator.latent_dim(), B);
  for (Index t = 0; t < T; ++t) grads.latent += grad_hidden.middleCols(t * B, B);
  return grads;
}

#define MGUARD_INSTANTIATE_GENERATOR(S)                                                                         \
  template struct Generator<S>;                                                                                 \
  template Matrix<S> generate(const Generator<S>&, const Eigen::Ref<const Matrix<S>>&, GeneratorCache<S>*);    \
  template GeneratorGradients<S> generator_backward(const Generator<S>&, const GeneratorCache<S>&,               \
                                                    const Eigen::Ref<const Matrix<S>>&, bool);

MGUARD_INSTANTIATE_GENERATOR(float)
MGUARD_INSTANTIATE_GENERATOR(double)

}  // namespace mguard
