#include "mguard/error.hpp"
#include "mguard/nn/types.hpp"

#include <functional>
#include <numeric>

namespace mguard {

std::size_t Tensor::element_count() const {
  return std::accumulate(dims.begin(), dims.end(), std::size_t{1},
                         [](std::size_t acc, std::uint32_t d) { return acc * d; });
}

void Tensor::validate() const {
  for (std::size_t i = 0; i < dims.size(); ++i) {
    if (dims[i] == 0) throw ShapeError("tensor dims[" + std::to_string(i) + "]", 1, 0);
  }
  if (element_count() != data.size()) {
    throw ShapeError("tensor element count", static_cast<long>(element_count()), static_cast<long>(data.size()));
  }
}

Tensor Tensor::from_matrix(const Eigen::Ref<const MatrixF>& m, bool as_vector) {
  Tensor t;
  if (as_vector) {
    expect_dim("vector columns", 1, m.cols());
    t.dims = {static_cast<std::uint32_t>(m.rows())};
  } else {
    t.dims = {static_cast<std::uint32_t>(m.rows()), static_cast<std::uint32_t>(m.cols())};
  }
  t.data.resize(static_cast<std::size_t>(m.size()));
  Eigen::Map<Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(t.data.data(), m.rows(),
                                                                                   m.cols()) = m;
  return t;
}

MatrixF Tensor::to_matrix() const {
  validate();
  if (rank() == 1) return Eigen::Map<const VectorF>(data.data(), dims[0]);
  if (rank() != 2) throw ShapeError("tensor rank", 2, static_cast<long>(rank()));
  return Eigen::Map<const Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(data.data(), dims[0],
                                                                                                 dims[1]);
}

}  // namespace mguard
