#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "msgwnn/graph.hpp"
#include "msgwnn/graph_build.hpp"
#include "msgwnn/layers.hpp"
#include "msgwnn/spectral.hpp"

namespace msgwnn {

struct LabeledGraph {
  Graph graph;
  std::vector<int> node_labels;
  int graph_label = 0;
};

enum class ModelArch { gwnn, gcn };

/// Multi-branch model: the raw node features pass through the two learned
/// similarity projections, whose concatenation feeds every branch; the same
/// projections define the percentile topology when rebuild_topology is on.
/// Topology is always treated as constant within a training step.
struct MsGwnnModel {
  ModelArch arch = ModelArch::gwnn;
  std::vector<GwnnNetwork> branches;  // gwnn: one per scale; gcn: exactly one
  SimilarityParams sim;
  EdgeRule edge_rule;
  std::optional<Matrix> readout_weight;  // C2 x C2; nullopt = identity
  OperatorMode mode = OperatorMode::chebyshev(2);
  bool rebuild_topology = false;
  int nodes = 0;

  int input_dim() const { return static_cast<int>(sim.theta_weight.rows()); }
  int proj_dim() const { return static_cast<int>(sim.theta_weight.cols()); }
  int branch_input_dim() const { return 2 * proj_dim(); }
  int num_classes() const {
    return static_cast<int>(branches.front().layers.back().weight.cols());
  }
  std::vector<double> scales() const;
};

struct ModelConfig {
  int input_dim = 0;  // C1, raw feature width
  int proj_dim = 0;   // Cp; 0 means same as input_dim
  int hidden1 = 256;
  int hidden2 = 128;
  int num_classes = 0;  // C2
  int node_count = 0;   // N; kernels are tied to the graph size
  std::vector<double> scales{0.5, 1.0, 1.5};
  OperatorMode mode = OperatorMode::chebyshev(2);
  double alpha = 99.0;
  bool readout_affine = false;
  bool rebuild_topology = false;
  ModelArch arch = ModelArch::gwnn;
};

MsGwnnModel make_model(const ModelConfig& config, std::uint64_t seed);

struct TrainConfig {
  double lambda = 1.0;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.99;
  int epochs = 200;
  int batch_size = 16;
  int chebyshev_k = 2;
  std::uint64_t seed = 0;
};

/// Wavelet operators (or the GCN propagation) derived from one adjacency.
struct GraphOperators {
  Matrix adjacency;
  std::vector<WaveletOperator> wavelet_ops;  // parallel to model.branches
  Matrix gcn_prop;
};

GraphOperators prepare_operators(const Matrix& adjacency, const MsGwnnModel& model);

/// Keyed by adjacency bytes; one entry per distinct topology.
class OperatorCache {
 public:
  const GraphOperators& get(const Matrix& adjacency, const MsGwnnModel& model);

 private:
  std::unordered_map<std::string, GraphOperators> entries_;
};

/// Adjacency the model uses for a given input graph: the stored one, or a
/// fresh percentile graph from the current similarity parameters.
Matrix model_adjacency(const MsGwnnModel& model, const Graph& g);

// ---- spec-level building blocks ----

/// Elementwise sum of per-branch probability maps.
Matrix aggregate_branches(const std::vector<Matrix>& branch_probs);

/// Column sums as logits (optionally through the readout affine), then
/// softmax. Returns the graph-level probability vector.
Vector graph_readout(const Matrix& agg,
                     const std::optional<Matrix>& readout_weight = {});

struct LossBreakdown {
  double total = 0.0;
  double node = 0.0;
  double graph = 0.0;
};

// ---- forward / backward ----

struct ModelForwardCache {
  Matrix features;  // raw H
  Matrix proj_theta, proj_phi, x1;
  std::vector<std::vector<LayerCache>> branch_layers;
  std::vector<Matrix> branch_probs;
  Matrix agg;
  Vector readout_logits;
  Vector graph_probs;
};

ModelForwardCache model_forward(const MsGwnnModel& model, const Matrix& features,
                                const GraphOperators& ops);

LossBreakdown model_loss(const ModelForwardCache& fwd, const LabeledGraph& ex,
                         double lambda);

struct ModelGrad {
  std::vector<std::vector<Matrix>> d_weights;
  std::vector<std::vector<Vector>> d_kernels;
  Matrix d_theta, d_phi;
  Matrix d_readout;  // 0x0 when the readout is the fixed identity
};

ModelGrad model_backward(const MsGwnnModel& model, const GraphOperators& ops,
                         const ModelForwardCache& fwd, const LabeledGraph& ex,
                         double lambda);

// ---- flat parameter views (optimizer, checkpoints, gradient checks) ----

int parameter_count(const MsGwnnModel& model);
Vector flatten_parameters(const MsGwnnModel& model);
void set_parameters(MsGwnnModel& model, const Vector& flat);
Vector flatten_gradients(const MsGwnnModel& model, const ModelGrad& grad);

// ---- training / evaluation ----

struct EpochMetrics {
  int epoch = 0;
  double loss_total = 0.0;
  double loss_node = 0.0;
  double loss_graph = 0.0;
  double train_acc = 0.0;
};

struct TrainResult {
  MsGwnnModel model;
  std::vector<EpochMetrics> metrics;
};

TrainResult train(MsGwnnModel model, const std::vector<LabeledGraph>& dataset,
                  const TrainConfig& config);

struct EvalResult {
  double accuracy = 0.0;
  Vector per_class;
  Matrix confusion;  // row-normalized, rows = true label
};

EvalResult evaluate(const MsGwnnModel& model,
                    const std::vector<LabeledGraph>& dataset);

/// Graph-level argmax with ties broken toward the lowest class id.
int predict_graph_label(const MsGwnnModel& model, const LabeledGraph& ex,
                        OperatorCache& cache);

struct AblationRow {
  std::vector<double> scales;
  double accuracy = 0.0;
};

/// One model per scale set, identical seed and config; accuracy on `test`.
std::vector<AblationRow> ablate_scales(
    const std::vector<std::vector<double>>& scale_sets,
    const std::vector<LabeledGraph>& train_set,
    const std::vector<LabeledGraph>& test_set, const ModelConfig& base,
    const TrainConfig& config);

}  // namespace msgwnn
