#pragma once

#include <cstdint>
#include <vector>

#include "msgwnn/graph.hpp"
#include "msgwnn/spectral.hpp"

namespace msgwnn {

enum class Activation { relu, softmax, none };

Matrix apply_activation(Activation act, const Matrix& z);

/// Row-wise softmax with max subtraction.
Matrix softmax_rows(const Matrix& z);

/// One layer: feature transformation X W followed by wavelet-domain
/// convolution Psi diag(kernel) Psi^{-1} and the activation. The kernel is
/// one value per node, shared across output channels; an empty kernel_diag
/// marks a kernel-free layer (the GCN baseline path).
struct GwnnLayerParams {
  Matrix weight;       // p x q
  Vector kernel_diag;  // N (empty for GCN layers)
  Activation activation = Activation::relu;
};

Matrix gwnn_layer_forward(const WaveletOperator& op, const GwnnLayerParams& params,
                          const Matrix& x);

/// Three-layer network: relu, relu, softmax.
struct GwnnNetwork {
  std::vector<GwnnLayerParams> layers;
  double scale = 1.0;
  OperatorMode mode = OperatorMode::chebyshev(2);
};

/// Fresh network with scaled-uniform fan-in weights and all-ones kernels.
/// dims = {in, hidden..., out}; node_count fixes the kernel length.
GwnnNetwork make_gwnn_network(const std::vector<int>& dims, int node_count,
                              double scale, OperatorMode mode,
                              std::uint64_t seed);

/// Forward pass against a prebuilt operator; x is N x dims.front().
Matrix gwnn_forward(const GwnnNetwork& net, const WaveletOperator& op,
                    const Matrix& x);

/// Convenience: builds the operator from the graph per net.mode and runs on
/// the graph's embeddings. Output rows are probability vectors.
Matrix gwnn_forward(const GwnnNetwork& net, const Graph& g);

/// Renormalized propagation D~^{-1/2} A~ D~^{-1/2} with A~ = A plus forced
/// unit diagonal. Pipeline graphs already carry self-loops, so this is
/// idempotent on them.
Matrix gcn_propagation(const Matrix& adjacency);

Matrix gcn_layer_forward(const Matrix& propagation, const Matrix& weight,
                         const Matrix& x, Activation act = Activation::relu);

// ---- forward caches and backward steps (training path) ----

struct LayerCache {
  Matrix x;   // layer input
  Matrix xw;  // x * weight
  Matrix m;   // Psi^{-1} (xw)           (gwnn)
  Matrix z;   // pre-activation
  Matrix y;   // activated output
};

LayerCache gwnn_layer_run(const WaveletOperator& op, const GwnnLayerParams& params,
                          const Matrix& x);
LayerCache gcn_layer_run(const Matrix& propagation, const GwnnLayerParams& params,
                         const Matrix& x);

struct LayerGrads {
  Matrix d_weight;
  Vector d_kernel;  // empty for kernel-free layers
  Matrix d_x;
};

/// Backward from d_z (gradient at the pre-activation) through one layer.
/// Uses the symmetry of both wavelet operators (transpose apply == apply).
LayerGrads gwnn_layer_backward(const WaveletOperator& op,
                               const GwnnLayerParams& params,
                               const LayerCache& cache, const Matrix& d_z);
LayerGrads gcn_layer_backward(const Matrix& propagation,
                              const GwnnLayerParams& params,
                              const LayerCache& cache, const Matrix& d_z);

/// d_z = d_y .* 1[z > 0]
Matrix relu_backward(const Matrix& d_y, const Matrix& z);

/// d_z = p .* (d_p - rowsum(d_p .* p)) for row-wise softmax p.
Matrix softmax_backward(const Matrix& d_p, const Matrix& p);

}  // namespace msgwnn
