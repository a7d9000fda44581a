#include "msgwnn/layers.hpp"

#include <cmath>
#include <string>

#include "msgwnn/rng.hpp"

namespace msgwnn {

Matrix softmax_rows(const Matrix& z) {
  Matrix p(z.rows(), z.cols());
  for (Eigen::Index i = 0; i < z.rows(); ++i) {
    const double m = z.row(i).maxCoeff();
    Eigen::RowVectorXd e = (z.row(i).array() - m).exp();
    p.row(i) = e / e.sum();
  }
  return p;
}

Matrix apply_activation(Activation act, const Matrix& z) {
  switch (act) {
    case Activation::relu:
      return z.cwiseMax(0.0);
    case Activation::softmax:
      return softmax_rows(z);
    case Activation::none:
      return z;
  }
  return z;
}

static void check_layer_dims(const WaveletOperator& op,
                             const GwnnLayerParams& params, const Matrix& x) {
  if (x.cols() != params.weight.rows())
    throw DimensionMismatch("layer input width " + std::to_string(x.cols()) +
                            " does not match weight rows " +
                            std::to_string(params.weight.rows()));
  if (x.rows() != op.size())
    throw DimensionMismatch("layer input rows must equal node count");
  if (params.kernel_diag.size() != op.size())
    throw DimensionMismatch("kernel length " +
                            std::to_string(params.kernel_diag.size()) +
                            " must equal node count " + std::to_string(op.size()));
}

LayerCache gwnn_layer_run(const WaveletOperator& op, const GwnnLayerParams& params,
                          const Matrix& x) {
  check_layer_dims(op, params, x);
  LayerCache c;
  c.x = x;
  c.xw = x * params.weight;
  c.m = op.apply_inverse(c.xw);
  c.z = op.apply_forward(params.kernel_diag.asDiagonal() * c.m);
  c.y = apply_activation(params.activation, c.z);
  return c;
}

Matrix gwnn_layer_forward(const WaveletOperator& op, const GwnnLayerParams& params,
                          const Matrix& x) {
  return gwnn_layer_run(op, params, x).y;
}

GwnnNetwork make_gwnn_network(const std::vector<int>& dims, int node_count,
                              double scale, OperatorMode mode, std::uint64_t seed) {
  if (dims.size() < 2) throw ArgumentError("network needs at least one layer");
  GwnnNetwork net;
  net.scale = scale;
  net.mode = mode;
  auto rng = make_rng(seed, "gwnn-init");
  for (std::size_t m = 0; m + 1 < dims.size(); ++m) {
    GwnnLayerParams layer;
    const double limit = std::sqrt(6.0 / dims[m]);
    std::uniform_real_distribution<double> dist(-limit, limit);
    layer.weight.resize(dims[m], dims[m + 1]);
    for (Eigen::Index i = 0; i < layer.weight.rows(); ++i)
      for (Eigen::Index j = 0; j < layer.weight.cols(); ++j)
        layer.weight(i, j) = dist(rng);
    layer.kernel_diag = Vector::Ones(node_count);
    layer.activation = (m + 2 == dims.size()) ? Activation::softmax : Activation::relu;
    net.layers.push_back(std::move(layer));
  }
  return net;
}

Matrix gwnn_forward(const GwnnNetwork& net, const WaveletOperator& op,
                    const Matrix& x) {
  Matrix h = x;
  for (const auto& layer : net.layers) h = gwnn_layer_forward(op, layer, h);
  return h;
}

Matrix gwnn_forward(const GwnnNetwork& net, const Graph& g) {
  const LaplacianMatrix l = normalized_laplacian(g);
  WaveletOperator op =
      net.mode.kind == OperatorMode::Kind::exact
          ? WaveletOperator::exact(eigendecompose(l), net.scale)
          : WaveletOperator::chebyshev(SparseLaplacian::from_dense(l.matrix),
                                       net.scale, net.mode.k);
  return gwnn_forward(net, op, g.embeddings());
}

Matrix gcn_propagation(const Matrix& adjacency) {
  Matrix a = adjacency;
  a.diagonal().setOnes();
  const Vector deg = a.rowwise().sum();
  const Vector dinv_sqrt = deg.array().rsqrt();
  return dinv_sqrt.asDiagonal() * a * dinv_sqrt.asDiagonal();
}

Matrix gcn_layer_forward(const Matrix& propagation, const Matrix& weight,
                         const Matrix& x, Activation act) {
  if (x.cols() != weight.rows())
    throw DimensionMismatch("gcn layer input width does not match weight rows");
  return apply_activation(act, propagation * (x * weight));
}

LayerCache gcn_layer_run(const Matrix& propagation, const GwnnLayerParams& params,
                         const Matrix& x) {
  LayerCache c;
  c.x = x;
  c.xw = x * params.weight;
  c.z = propagation * c.xw;
  c.y = apply_activation(params.activation, c.z);
  return c;
}

Matrix relu_backward(const Matrix& d_y, const Matrix& z) {
  return (z.array() > 0.0).select(d_y, Matrix::Zero(d_y.rows(), d_y.cols()));
}

Matrix softmax_backward(const Matrix& d_p, const Matrix& p) {
  const Vector row_dot = (d_p.array() * p.array()).rowwise().sum();
  return p.array() * (d_p.array().colwise() - row_dot.array());
}

LayerGrads gwnn_layer_backward(const WaveletOperator& op,
                               const GwnnLayerParams& params,
                               const LayerCache& cache, const Matrix& d_z) {
  LayerGrads g;
  const Matrix d_g = op.apply_forward(d_z);  // Psi^T = Psi
  g.d_kernel = (d_g.array() * cache.m.array()).rowwise().sum();
  const Matrix d_m = params.kernel_diag.asDiagonal() * d_g;
  const Matrix d_xw = op.apply_inverse(d_m);  // (Psi^{-1})^T = Psi^{-1}
  g.d_weight = cache.x.transpose() * d_xw;
  g.d_x = d_xw * params.weight.transpose();
  return g;
}

LayerGrads gcn_layer_backward(const Matrix& propagation,
                              const GwnnLayerParams& params,
                              const LayerCache& cache, const Matrix& d_z) {
  LayerGrads g;
  const Matrix d_xw = propagation * d_z;  // propagation is symmetric
  g.d_weight = cache.x.transpose() * d_xw;
  g.d_x = d_xw * params.weight.transpose();
  return g;
}

}  // namespace msgwnn
