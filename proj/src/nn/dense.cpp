#include "mguard/nn/dense.hpp"

#include "mguard/error.hpp"
#include "mguard/nn/rng.hpp"

#include <cmath>

namespace mguard {

template <typename Scalar>
DenseLayer<Scalar> DenseLayer<Scalar>::zeros(Index input_size, Index output_size) {
  return {Matrix<Scalar>::Zero(output_size, input_size), Vector<Scalar>::Zero(output_size)};
}

template <typename Scalar>
DenseLayer<Scalar> DenseLayer<Scalar>::initialized(Index input_size, Index output_size, Rng& rng) {
  const auto bound = static_cast<Scalar>(1.0 / std::sqrt(static_cast<double>(input_size)));
  return {sample_uniform<Scalar>(rng, -bound, bound, output_size, input_size), Vector<Scalar>::Zero(output_size)};
}

template <typename Scalar>
void DenseLayer<Scalar>::append_params(std::vector<ParamRef<Scalar>>& out, const std::string& prefix) {
  out.push_back({prefix + ".W", W.data(), W.rows(), W.cols()});
  out.push_back({prefix + ".b", b.data(), b.rows(), 1});
}

template <typename Scalar>
Matrix<Scalar> dense_forward(const DenseLayer<Scalar>& layer, const Eigen::Ref<const Matrix<Scalar>>& x) {
  expect_dim("dense input rows", layer.input_size(), x.rows());
  expect_dim("dense bias rows", layer.output_size(), layer.b.rows());
  Matrix<Scalar> y = layer.W * x;
  y.colwise() += layer.b;
  return y;
}

template <typename Scalar>
DenseGradients<Scalar> dense_backward(const DenseLayer<Scalar>& layer, const Eigen::Ref<const Matrix<Scalar>>& x,
                                      const Eigen::Ref<const Matrix<Scalar>>& grad_output, bool param_grads) {
  expect_dim("dense input rows", layer.input_size(), x.rows());
  expect_dim("dense grad rows", layer.output_size(), grad_output.rows());
  expect_dim("dense grad cols", x.cols(), grad_output.cols());
  DenseGradients<Scalar> g;
  if (param_grads) {
    g.params.W.noalias() = grad_output * x.transpose();
    g.params.b = grad_output.rowwise().sum();
  }
  g.input.noalias() = layer.W.transpose() * grad_output;
  return g;
}

template struct DenseLayer<float>;
template struct DenseLayer<double>;
template Matrix<float> dense_forward(const DenseLayer<float>&, const Eigen::Ref<const Matrix<float>>&);
template Matrix<double> dense_forward(const DenseLayer<double>&, const Eigen::Ref<const Matrix<double>>&);
template DenseGradients<float> dense_backward(const DenseLayer<float>&, const Eigen::Ref<const Matrix<float>>&,
                                              const Eigen::Ref<const Matrix<float>>&, bool);
template DenseGradients<double> dense_backward(const DenseLayer<double>&, const Eigen::Ref<const Matrix<double>>&,
                                               const Eigen::Ref<const Matrix<double>>&, bool);

}  // namespace mguard
