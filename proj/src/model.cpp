#include "msgwnn/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "msgwnn/rng.hpp"

namespace msgwnn {

namespace {
constexpr double kProbFloor = 1e-12;

int argmax_lowest(const Vector& v) {
  int best = 0;
  for (int i = 1; i < v.size(); ++i) {
    if (v(i) > v(best)) best = i;
  }
  return best;
}
}  // namespace

std::vector<double> MsGwnnModel::scales() const {
  std::vector<double> s;
  s.reserve(branches.size());
  for (const auto& b : branches) s.push_back(b.scale);
  return s;
}

MsGwnnModel make_model(const ModelConfig& config, std::uint64_t seed) {
  if (config.input_dim < 1 || config.num_classes < 1 || config.node_count < 1)
    throw ArgumentError("model config needs input_dim, num_classes and node_count");
  if (config.arch == ModelArch::gwnn) {
    if (config.scales.empty()) throw ArgumentError("model needs at least one scale");
    for (std::size_t i = 0; i + 1 < config.scales.size(); ++i) {
      if (!(config.scales[i] < config.scales[i + 1]))
        throw ArgumentError("scales must be strictly increasing");
    }
    for (double s : config.scales) {
      if (!(s > 0.0)) throw ArgumentError("scales must be positive");
    }
  }

  MsGwnnModel model;
  model.arch = config.arch;
  model.mode = config.mode;
  model.edge_rule = EdgeRule{config.alpha};
  model.rebuild_topology = config.rebuild_topology;
  model.nodes = config.node_count;

  const int cp = config.proj_dim > 0 ? config.proj_dim : config.input_dim;
  auto init_matrix = [&](int rows, int cols, const std::string& name) {
    const double limit = std::sqrt(6.0 / rows);
    auto rng = make_rng(seed, name);
    std::uniform_real_distribution<double> dist(-limit, limit);
    Matrix m(rows, cols);
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = dist(rng);
    return m;
  };
  model.sim.theta_weight = init_matrix(config.input_dim, cp, "sim/theta");
  model.sim.phi_weight = init_matrix(config.input_dim, cp, "sim/phi");

  const std::vector<int> dims{2 * cp, config.hidden1, config.hidden2,
                              config.num_classes};
  if (config.arch == ModelArch::gwnn) {
    for (std::size_t b = 0; b < config.scales.size(); ++b) {
      GwnnNetwork net = make_gwnn_network(
          dims, config.node_count, config.scales[b], config.mode,
          derive_seed(seed, "branch/" + std::to_string(b)));
      model.branches.push_back(std::move(net));
    }
  } else {
    GwnnNetwork net = make_gwnn_network(dims, config.node_count, 0.0, config.mode,
                                        derive_seed(seed, "branch/gcn"));
    for (auto& layer : net.layers) layer.kernel_diag.resize(0);
    model.branches.push_back(std::move(net));
  }

  if (config.readout_affine)
    model.readout_weight = Matrix::Identity(config.num_classes, config.num_classes);
  return model;
}

GraphOperators prepare_operators(const Matrix& adjacency, const MsGwnnModel& model) {
  GraphOperators ops;
  ops.adjacency = adjacency;
  if (model.arch == ModelArch::gcn) {
    ops.gcn_prop = gcn_propagation(adjacency);
    return ops;
  }
  const LaplacianMatrix l =
      normalized_laplacian(Graph(adjacency, Matrix::Zero(adjacency.rows(), 0)));
  if (model.mode.kind == OperatorMode::Kind::exact) {
    const SpectralDecomposition sd = eigendecompose(l);
    for (const auto& b : model.branches)
      ops.wavelet_ops.push_back(WaveletOperator::exact(sd, b.scale));
  } else {
    const SparseLaplacian sparse = SparseLaplacian::from_dense(l.matrix);
    for (const auto& b : model.branches)
      ops.wavelet_ops.push_back(
          WaveletOperator::chebyshev(sparse, b.scale, model.mode.k));
  }
  return ops;
}

const GraphOperators& OperatorCache::get(const Matrix& adjacency,
                                         const MsGwnnModel& model) {
  std::string key(reinterpret_cast<const char*>(adjacency.data()),
                  sizeof(double) * static_cast<std::size_t>(adjacency.size()));
  auto it = entries_.find(key);
  if (it != entries_.end()) return it->second;
  if (entries_.size() > 64) entries_.clear();
  return entries_.emplace(std::move(key), prepare_operators(adjacency, model))
      .first->second;
}

Matrix model_adjacency(const MsGwnnModel& model, const Graph& g) {
  if (!model.rebuild_topology) return g.adjacency();
  const Matrix pt = g.embeddings() * model.sim.theta_weight;
  const Matrix pp = g.embeddings() * model.sim.phi_weight;
  return threshold_edges(pt * pp.transpose(), model.edge_rule);
}

Matrix aggregate_branches(const std::vector<Matrix>& branch_probs) {
  if (branch_probs.empty()) throw ShapeMismatch("aggregate needs at least one branch");
  Matrix agg = branch_probs.front();
  for (std::size_t b = 1; b < branch_probs.size(); ++b) {
    if (branch_probs[b].rows() != agg.rows() || branch_probs[b].cols() != agg.cols())
      throw ShapeMismatch("branch probability maps differ in shape");
    agg += branch_probs[b];
  }
  return agg;
}

Vector graph_readout(const Matrix& agg, const std::optional<Matrix>& readout_weight) {
  Vector logits = agg.colwise().sum().transpose();
  if (readout_weight) logits = readout_weight->transpose() * logits;
  const double m = logits.maxCoeff();
  Vector e = (logits.array() - m).exp();
  return e / e.sum();
}

ModelForwardCache model_forward(const MsGwnnModel& model, const Matrix& features,
                                const GraphOperators& ops) {
  if (features.cols() != model.input_dim())
    throw DimensionMismatch("feature width " + std::to_string(features.cols()) +
                            " does not match model input dim " +
                            std::to_string(model.input_dim()));
  ModelForwardCache fwd;
  fwd.features = features;
  fwd.proj_theta = features * model.sim.theta_weight;
  fwd.proj_phi = features * model.sim.phi_weight;
  fwd.x1.resize(features.rows(), 2 * model.proj_dim());
  fwd.x1 << fwd.proj_theta, fwd.proj_phi;

  for (std::size_t b = 0; b < model.branches.size(); ++b) {
    const GwnnNetwork& net = model.branches[b];
    std::vector<LayerCache> caches;
    Matrix h = fwd.x1;
    for (const auto& layer : net.layers) {
      LayerCache c = model.arch == ModelArch::gwnn
                         ? gwnn_layer_run(ops.wavelet_ops[b], layer, h)
                         : gcn_layer_run(ops.gcn_prop, layer, h);
      h = c.y;
      caches.push_back(std::move(c));
    }
    fwd.branch_probs.push_back(h);
    fwd.branch_layers.push_back(std::move(caches));
  }
  fwd.agg = aggregate_branches(fwd.branch_probs);

  Vector logits = fwd.agg.colwise().sum().transpose();
  if (model.readout_weight) logits = model.readout_weight->transpose() * logits;
  fwd.readout_logits = logits;
  const double m = logits.maxCoeff();
  Vector e = (logits.array() - m).exp();
  fwd.graph_probs = e / e.sum();
  return fwd;
}

LossBreakdown model_loss(const ModelForwardCache& fwd, const LabeledGraph& ex,
                         double lambda) {
  const int n = static_cast<int>(fwd.features.rows());
  const int c2 = static_cast<int>(fwd.graph_probs.size());
  if (static_cast<int>(ex.node_labels.size()) != n)
    throw ValidationError("node label count does not match node count");
  if (ex.graph_label < 0 || ex.graph_label >= c2)
    throw ValidationError("graph label out of range");
  LossBreakdown loss;
  for (const Matrix& probs : fwd.branch_probs) {
    double branch_sum = 0.0;
    for (int i = 0; i < n; ++i) {
      const int y = ex.node_labels[i];
      if (y < 0 || y >= c2) throw ValidationError("node label out of range");
      branch_sum += -std::log(std::max(probs(i, y), kProbFloor));
    }
    loss.node += branch_sum / n;
  }
  loss.graph = -std::log(std::max(fwd.graph_probs(ex.graph_label), kProbFloor));
  loss.total = lambda * loss.node + loss.graph;
  return loss;
}

ModelGrad model_backward(const MsGwnnModel& model, const GraphOperators& ops,
                         const ModelForwardCache& fwd, const LabeledGraph& ex,
                         double lambda) {
  const int n = static_cast<int>(fwd.features.rows());
  const int c2 = model.num_classes();
  ModelGrad grad;
  grad.d_weights.resize(model.branches.size());
  grad.d_kernels.resize(model.branches.size());

  // Graph-level cross entropy through the readout softmax.
  Vector d_logits = fwd.graph_probs;
  d_logits(ex.graph_label) -= 1.0;
  Vector d_colsum = d_logits;
  if (model.readout_weight) {
    grad.d_readout = fwd.agg.colwise().sum().transpose() * d_logits.transpose();
    d_colsum = (*model.readout_weight) * d_logits;
  }
  // Every node row of the aggregated map receives the column-sum gradient.
  Matrix d_agg = d_colsum.transpose().replicate(n, 1);

  Matrix d_x1 = Matrix::Zero(n, fwd.x1.cols());
  for (std::size_t b = 0; b < model.branches.size(); ++b) {
    const GwnnNetwork& net = model.branches[b];
    const auto& caches = fwd.branch_layers[b];
    const Matrix& probs = fwd.branch_probs[b];

    // Branch softmax output feeds both losses: the aggregated graph path
    // (generic softmax backward) and the node cross entropy (closed form).
    Matrix d_z = softmax_backward(d_agg, probs);
    for (int i = 0; i < n; ++i) {
      for (int c = 0; c < c2; ++c) {
        const double target = (c == ex.node_labels[i]) ? 1.0 : 0.0;
        d_z(i, c) += lambda / n * (probs(i, c) - target);
      }
    }

    grad.d_weights[b].resize(net.layers.size());
    grad.d_kernels[b].resize(net.layers.size());
    for (int layer = static_cast<int>(net.layers.size()) - 1; layer >= 0; --layer) {
      LayerGrads lg = model.arch == ModelArch::gwnn
                          ? gwnn_layer_backward(ops.wavelet_ops[b],
                                                net.layers[layer], caches[layer], d_z)
                          : gcn_layer_backward(ops.gcn_prop, net.layers[layer],
                                               caches[layer], d_z);
      grad.d_weights[b][layer] = std::move(lg.d_weight);
      grad.d_kernels[b][layer] = std::move(lg.d_kernel);
      if (layer > 0) d_z = relu_backward(lg.d_x, caches[layer - 1].z);
      if (layer == 0) d_x1 += lg.d_x;
    }
  }

  const int cp = model.proj_dim();
  grad.d_theta = fwd.features.transpose() * d_x1.leftCols(cp);
  grad.d_phi = fwd.features.transpose() * d_x1.rightCols(cp);
  return grad;
}

int parameter_count(const MsGwnnModel& model) {
  int count = 0;
  for (const auto& net : model.branches) {
    for (const auto& layer : net.layers) {
      count += static_cast<int>(layer.weight.size() + layer.kernel_diag.size());
    }
  }
  count += static_cast<int>(model.sim.theta_weight.size() + model.sim.phi_weight.size());
  if (model.readout_weight) count += static_cast<int>(model.readout_weight->size());
  return count;
}

namespace {
// Shared walk so parameter order is identical everywhere: per branch
// W1,F1,W2,F2,W3,F3, then theta, phi, then the readout when enabled.
template <typename MatrixFn, typename VectorFn>
void walk_parameters(const MsGwnnModel& model, MatrixFn on_matrix, VectorFn on_vector) {
  for (std::size_t b = 0; b < model.branches.size(); ++b) {
    const auto& net = model.branches[b];
    for (std::size_t l = 0; l < net.layers.size(); ++l) {
      on_matrix(b, static_cast<int>(l), net.layers[l].weight);
      if (net.layers[l].kernel_diag.size() > 0)
        on_vector(b, static_cast<int>(l), net.layers[l].kernel_diag);
    }
  }
}
}  // namespace

Vector flatten_parameters(const MsGwnnModel& model) {
  Vector flat(parameter_count(model));
  Eigen::Index pos = 0;
  auto put_matrix = [&](const Matrix& m) {
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      for (Eigen::Index j = 0; j < m.cols(); ++j) flat(pos++) = m(i, j);
  };
  walk_parameters(
      model, [&](std::size_t, int, const Matrix& m) { put_matrix(m); },
      [&](std::size_t, int, const Vector& v) {
        flat.segment(pos, v.size()) = v;
        pos += v.size();
      });
  put_matrix(model.sim.theta_weight);
  put_matrix(model.sim.phi_weight);
  if (model.readout_weight) put_matrix(*model.readout_weight);
  return flat;
}

void set_parameters(MsGwnnModel& model, const Vector& flat) {
  if (flat.size() != parameter_count(model))
    throw DimensionMismatch("flat parameter vector has wrong length");
  Eigen::Index pos = 0;
  auto take_matrix = [&](Matrix& m) {
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = flat(pos++);
  };
  for (auto& net : model.branches) {
    for (auto& layer : net.layers) {
      take_matrix(layer.weight);
      if (layer.kernel_diag.size() > 0) {
        layer.kernel_diag = flat.segment(pos, layer.kernel_diag.size());
        pos += layer.kernel_diag.size();
      }
    }
  }
  take_matrix(model.sim.theta_weight);
  take_matrix(model.sim.phi_weight);
  if (model.readout_weight) take_matrix(*model.readout_weight);
}

Vector flatten_gradients(const MsGwnnModel& model, const ModelGrad& grad) {
  Vector flat(parameter_count(model));
  Eigen::Index pos = 0;
  auto put_matrix = [&](const Matrix& m) {
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      for (Eigen::Index j = 0; j < m.cols(); ++j) flat(pos++) = m(i, j);
  };
  walk_parameters(
      model,
      [&](std::size_t b, int l, const Matrix&) { put_matrix(grad.d_weights[b][l]); },
      [&](std::size_t b, int l, const Vector&) {
        flat.segment(pos, grad.d_kernels[b][l].size()) = grad.d_kernels[b][l];
        pos += grad.d_kernels[b][l].size();
      });
  put_matrix(grad.d_theta);
  put_matrix(grad.d_phi);
  if (model.readout_weight) put_matrix(grad.d_readout);
  return flat;
}

namespace {
void validate_dataset(const MsGwnnModel& model,
                      const std::vector<LabeledGraph>& dataset) {
  if (dataset.empty()) throw InconsistentDataset("dataset is empty");
  for (const auto& ex : dataset) {
    if (ex.graph.node_count() != model.nodes)
      throw InconsistentDataset("graph node count " +
                                std::to_string(ex.graph.node_count()) +
                                " differs from model size " +
                                std::to_string(model.nodes));
    if (ex.graph.embeddings().cols() != model.input_dim())
      throw InconsistentDataset("embedding width differs from model input dim");
    if (static_cast<int>(ex.node_labels.size()) != ex.graph.node_count())
      throw InconsistentDataset("node label count mismatch");
    if (ex.graph_label < 0 || ex.graph_label >= model.num_classes())
      throw InconsistentDataset("graph label out of range");
    for (int y : ex.node_labels) {
      if (y < 0 || y >= model.num_classes())
        throw InconsistentDataset("node label out of range");
    }
  }
}
}  // namespace

TrainResult train(MsGwnnModel model, const std::vector<LabeledGraph>& dataset,
                  const TrainConfig& config) {
  validate_dataset(model, dataset);
  const int count = static_cast<int>(dataset.size());
  const int batch = std::max(1, std::min(config.batch_size, count));

  Vector params = flatten_parameters(model);
  Vector m1 = Vector::Zero(params.size());
  Vector m2 = Vector::Zero(params.size());
  long step = 0;

  std::vector<int> order(count);
  std::iota(order.begin(), order.end(), 0);
  auto rng = make_rng(config.seed, "train/shuffle");

  OperatorCache cache;
  TrainResult result;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    EpochMetrics em;
    em.epoch = epoch;
    int correct = 0;

    for (int start = 0; start < count; start += batch) {
      const int size = std::min(batch, count - start);
      Vector grad_sum = Vector::Zero(params.size());
      for (int k = 0; k < size; ++k) {
        const LabeledGraph& ex = dataset[order[start + k]];
        const Matrix adj = model_adjacency(model, ex.graph);
        const GraphOperators& ops = cache.get(adj, model);
        const ModelForwardCache fwd = model_forward(model, ex.graph.embeddings(), ops);
        const LossBreakdown loss = model_loss(fwd, ex, config.lambda);
        em.loss_total += loss.total;
        em.loss_node += loss.node;
        em.loss_graph += loss.graph;
        if (argmax_lowest(fwd.graph_probs) == ex.graph_label) ++correct;
        const ModelGrad grad = model_backward(model, ops, fwd, ex, config.lambda);
        grad_sum += flatten_gradients(model, grad);
      }
      const Vector g = grad_sum / size;
      ++step;
      m1 = config.beta1 * m1 + (1.0 - config.beta1) * g;
      m2 = config.beta2 * m2 + (1.0 - config.beta2) * g.cwiseProduct(g);
      const double c1 = 1.0 - std::pow(config.beta1, step);
      const double c2 = 1.0 - std::pow(config.beta2, step);
      params -= config.learning_rate *
                ((m1 / c1).array() / ((m2 / c2).array().sqrt() + 1e-8)).matrix();
      set_parameters(model, params);
    }

    em.loss_total /= count;
    em.loss_node /= count;
    em.loss_graph /= count;
    em.train_acc = static_cast<double>(correct) / count;
    result.metrics.push_back(em);
  }
  result.model = std::move(model);
  return result;
}

int predict_graph_label(const MsGwnnModel& model, const LabeledGraph& ex,
                        OperatorCache& cache) {
  const Matrix adj = model_adjacency(model, ex.graph);
  const GraphOperators& ops = cache.get(adj, model);
  const ModelForwardCache fwd = model_forward(model, ex.graph.embeddings(), ops);
  return argmax_lowest(fwd.graph_probs);
}

EvalResult evaluate(const MsGwnnModel& model,
                    const std::vector<LabeledGraph>& dataset) {
  validate_dataset(model, dataset);
  const int c2 = model.num_classes();
  Matrix counts = Matrix::Zero(c2, c2);
  OperatorCache cache;
  int correct = 0;
  for (const auto& ex : dataset) {
    const int pred = predict_graph_label(model, ex, cache);
    counts(ex.graph_label, pred) += 1.0;
    if (pred == ex.graph_label) ++correct;
  }
  EvalResult res;
  res.accuracy = static_cast<double>(correct) / static_cast<double>(dataset.size());
  res.per_class = Vector::Zero(c2);
  res.confusion = Matrix::Zero(c2, c2);
  for (int c = 0; c < c2; ++c) {
    const double row_sum = counts.row(c).sum();
    if (row_sum > 0.0) {
      res.confusion.row(c) = counts.row(c) / row_sum;
      res.per_class(c) = counts(c, c) / row_sum;
    }
  }
  return res;
}

std::vector<AblationRow> ablate_scales(
    const std::vector<std::vector<double>>& scale_sets,
    const std::vector<LabeledGraph>& train_set,
    const std::vector<LabeledGraph>& test_set, const ModelConfig& base,
    const TrainConfig& config) {
  std::vector<AblationRow> rows;
  for (const auto& scales : scale_sets) {
    if (scales.empty()) throw ArgumentError("empty scale set in ablation");
    ModelConfig cfg = base;
    cfg.scales = scales;
    MsGwnnModel model = make_model(cfg, config.seed);
    TrainResult trained = train(std::move(model), train_set, config);
    const EvalResult eval = evaluate(trained.model, test_set);
    rows.push_back(AblationRow{scales, eval.accuracy});
  }
  return rows;
}

}  // namespace msgwnn
