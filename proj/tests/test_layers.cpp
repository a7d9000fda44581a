#include <doctest.h>

#include <random>

#include "msgwnn/layers.hpp"
#include "test_util.hpp"

using namespace msgwnn;

namespace {

WaveletOperator exact_op(const Graph& g, double s) {
  return WaveletOperator::exact(eigendecompose(normalized_laplacian(g)), s);
}

}  // namespace

TEST_CASE("gwnn layer basics") {
  std::mt19937_64 rng(211);
  const Graph g = test::random_connected_graph(10, 0.3, rng);
  const Matrix x = test::random_matrix(10, 4, rng);
  const Matrix w = test::random_matrix(4, 3, rng);

  SUBCASE("scale zero with unit kernel is the plain linear map") {
    GwnnLayerParams params{w, Vector::Ones(10), Activation::none};
    const Matrix out = gwnn_layer_forward(exact_op(g, 0.0), params, x);
    CHECK((out - x * w).cwiseAbs().maxCoeff() < 1e-10);
  }

  SUBCASE("unit kernel cancels the wavelet pair at any scale") {
    GwnnLayerParams params{w, Vector::Ones(10), Activation::none};
    for (double s : {0.5, 1.0, 2.0}) {
      const Matrix out = gwnn_layer_forward(exact_op(g, s), params, x);
      CHECK((out - x * w).cwiseAbs().maxCoeff() < 1e-6);
    }
  }

  SUBCASE("zero weight saturates the activation") {
    GwnnLayerParams relu_params{Matrix::Zero(4, 3), Vector::Ones(10),
                                Activation::relu};
    CHECK(gwnn_layer_forward(exact_op(g, 1.0), relu_params, x).cwiseAbs().maxCoeff() ==
          0.0);
    GwnnLayerParams soft_params{Matrix::Zero(4, 3), Vector::Ones(10),
                                Activation::softmax};
    const Matrix out = gwnn_layer_forward(exact_op(g, 1.0), soft_params, x);
    CHECK((out - Matrix::Constant(10, 3, 1.0 / 3.0)).cwiseAbs().maxCoeff() < 1e-12);
  }

  SUBCASE("kernel is shared across output channels") {
    std::mt19937_64 rng2(212);
    const Vector kernel = test::random_vector(10, rng2);
    GwnnLayerParams params{w, kernel, Activation::none};
    const WaveletOperator op = exact_op(g, 0.8);
    const Matrix full = gwnn_layer_forward(op, params, x);
    for (int c = 0; c < 3; ++c) {
      GwnnLayerParams col_params{w.col(c), kernel, Activation::none};
      const Matrix col = gwnn_layer_forward(op, col_params, x);
      CHECK((full.col(c) - col.col(0)).cwiseAbs().maxCoeff() < 1e-12);
    }
  }

  SUBCASE("dimension validation") {
    GwnnLayerParams params{w, Vector::Ones(9), Activation::none};
    CHECK_THROWS_AS(gwnn_layer_forward(exact_op(g, 1.0), params, x),
                    DimensionMismatch);
    GwnnLayerParams bad_w{test::random_matrix(5, 3, rng), Vector::Ones(10),
                          Activation::none};
    CHECK_THROWS_AS(gwnn_layer_forward(exact_op(g, 1.0), bad_w, x),
                    DimensionMismatch);
  }
}

TEST_CASE("gwnn layer: exact and chebyshev paths agree at k=16") {
  std::mt19937_64 rng(223);
  const Graph g = test::random_connected_graph(20, 0.2, rng);
  const LaplacianMatrix l = normalized_laplacian(g);
  const Matrix x = test::random_matrix(20, 5, rng);
  GwnnLayerParams params{test::random_matrix(5, 4, rng),
                         test::random_vector(20, rng), Activation::none};
  for (double s : {0.5, 1.0, 2.0}) {
    const WaveletOperator exact = WaveletOperator::exact(eigendecompose(l), s);
    const WaveletOperator cheb =
        WaveletOperator::chebyshev(SparseLaplacian::from_dense(l.matrix), s, 16);
    const Matrix a = gwnn_layer_forward(exact, params, x);
    const Matrix b = gwnn_layer_forward(cheb, params, x);
    CHECK((a - b).norm() / a.norm() < 1e-3);
  }
}

TEST_CASE("gwnn forward network") {
  std::mt19937_64 rng(227);
  const Graph g = test::random_connected_graph(12, 0.3, rng, true, 6);

  GwnnNetwork net = make_gwnn_network({6, 5, 4, 3}, 12, 1.0, OperatorMode::exact(), 99);
  REQUIRE(net.layers.size() == 3);
  CHECK(net.layers[0].activation == Activation::relu);
  CHECK(net.layers[1].activation == Activation::relu);
  CHECK(net.layers[2].activation == Activation::softmax);

  SUBCASE("output rows are probability vectors") {
    const Matrix probs = gwnn_forward(net, g);
    for (int i = 0; i < probs.rows(); ++i) {
      CHECK(probs.row(i).sum() == doctest::Approx(1.0).epsilon(1e-6));
      CHECK(probs.row(i).minCoeff() >= 0.0);
    }
  }

  SUBCASE("single node graph degenerates to an MLP") {
    const Graph one(Matrix::Ones(1, 1), test::random_matrix(1, 6, rng));
    GwnnNetwork tiny = make_gwnn_network({6, 5, 4, 3}, 1, 1.0, OperatorMode::exact(), 7);
    const Matrix probs = gwnn_forward(tiny, one);
    // Psi = [1], so only the feature transforms and activations remain.
    Matrix h = one.embeddings();
    for (const auto& layer : tiny.layers)
      h = apply_activation(layer.activation, h * layer.weight);
    CHECK((probs - h).cwiseAbs().maxCoeff() < 1e-9);
  }

  SUBCASE("permutation equivariance") {
    std::vector<int> perm(12);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    Matrix p = Matrix::Zero(12, 12);
    for (int i = 0; i < 12; ++i) p(perm[i], i) = 1.0;

    const Matrix adj_perm = p.transpose() * g.adjacency() * p;
    const Matrix emb_perm = p.transpose() * g.embeddings();
    // Kernel entries ride along with their nodes.
    GwnnNetwork net_perm = net;
    for (auto& layer : net_perm.layers)
      layer.kernel_diag = (p.transpose() * layer.kernel_diag).eval();

    const Matrix base = gwnn_forward(net, g);
    const Matrix permuted = gwnn_forward(net_perm, Graph(adj_perm, emb_perm));
    CHECK((permuted - p.transpose() * base).cwiseAbs().maxCoeff() < 1e-6);
  }
}

TEST_CASE("gcn propagation and layer") {
  SUBCASE("single node with self-loop") {
    const Matrix prop = gcn_propagation(Matrix::Ones(1, 1));
    CHECK(prop(0, 0) == doctest::Approx(1.0));
  }

  SUBCASE("K2 plus self-loops averages both nodes") {
    Matrix adj(2, 2);
    adj << 0, 1, 1, 0;
    const Matrix prop = gcn_propagation(adj);
    CHECK((prop - Matrix::Constant(2, 2, 0.5)).cwiseAbs().maxCoeff() < 1e-12);
    // Idempotent on graphs that already carry self-loops.
    Matrix with_loops(2, 2);
    with_loops << 1, 1, 1, 1;
    CHECK((gcn_propagation(with_loops) - prop).cwiseAbs().maxCoeff() < 1e-12);
  }

  SUBCASE("self-loops only propagate nothing") {
    std::mt19937_64 rng(229);
    const Matrix x = test::random_matrix(3, 4, rng);
    const Matrix w = test::random_matrix(4, 2, rng);
    const Matrix prop = gcn_propagation(Matrix::Identity(3, 3));
    const Matrix out = gcn_layer_forward(prop, w, x);
    CHECK((out - (x * w).cwiseMax(0.0)).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("layer gradients match central finite differences") {
  std::mt19937_64 rng(233);
  const int n = 8;
  const Graph g = test::random_connected_graph(n, 0.3, rng);
  const WaveletOperator op = exact_op(g, 0.9);
  const Matrix x = test::random_matrix(n, 3, rng);
  const Matrix probe = test::random_matrix(n, 2, rng);  // fixed loss direction

  GwnnLayerParams params{test::random_matrix(3, 2, rng),
                         test::random_vector(n, rng), Activation::relu};

  auto loss_of = [&](const GwnnLayerParams& p) {
    return (gwnn_layer_forward(op, p, x).array() * probe.array()).sum();
  };

  const LayerCache cache = gwnn_layer_run(op, params, x);
  const Matrix d_z = relu_backward(probe, cache.z);
  const LayerGrads grads = gwnn_layer_backward(op, params, cache, d_z);

  const double h = 1e-6;
  auto check_close = [](double analytic, double fd) {
    const double denom = std::max({std::abs(analytic), std::abs(fd), 1e-8});
    CHECK(std::abs(analytic - fd) / denom < 1e-4);
  };

  for (int i = 0; i < params.weight.rows(); ++i) {
    for (int j = 0; j < params.weight.cols(); ++j) {
      GwnnLayerParams up = params, down = params;
      up.weight(i, j) += h;
      down.weight(i, j) -= h;
      check_close(grads.d_weight(i, j), (loss_of(up) - loss_of(down)) / (2 * h));
    }
  }
  for (int i = 0; i < n; ++i) {
    GwnnLayerParams up = params, down = params;
    up.kernel_diag(i) += h;
    down.kernel_diag(i) -= h;
    check_close(grads.d_kernel(i), (loss_of(up) - loss_of(down)) / (2 * h));
  }

  auto loss_at_x = [&](const Matrix& xx) {
    return (gwnn_layer_forward(op, params, xx).array() * probe.array()).sum();
  };
  for (int i = 0; i < 3; ++i) {
    Matrix up = x, down = x;
    up(i, i % 3) += h;
    down(i, i % 3) -= h;
    check_close(grads.d_x(i, i % 3), (loss_at_x(up) - loss_at_x(down)) / (2 * h));
  }
}

TEST_CASE("gcn layer gradients match central finite differences") {
  std::mt19937_64 rng(239);
  const int n = 6;
  const Graph g = test::random_connected_graph(n, 0.4, rng);
  const Matrix prop = gcn_propagation(g.adjacency());
  const Matrix x = test::random_matrix(n, 3, rng);
  const Matrix probe = test::random_matrix(n, 2, rng);

  GwnnLayerParams params{test::random_matrix(3, 2, rng), Vector(), Activation::relu};

  auto loss_of = [&](const Matrix& w) {
    return (gcn_layer_forward(prop, w, x).array() * probe.array()).sum();
  };

  const LayerCache cache = gcn_layer_run(prop, params, x);
  const Matrix d_z = relu_backward(probe, cache.z);
  const LayerGrads grads = gcn_layer_backward(prop, params, cache, d_z);

  const double h = 1e-6;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 2; ++j) {
      Matrix up = params.weight, down = params.weight;
      up(i, j) += h;
      down(i, j) -= h;
      const double fd = (loss_of(up) - loss_of(down)) / (2 * h);
      const double denom =
          std::max({std::abs(grads.d_weight(i, j)), std::abs(fd), 1e-8});
      CHECK(std::abs(grads.d_weight(i, j) - fd) / denom < 1e-4);
    }
  }
}

TEST_CASE("softmax backward identity") {
  std::mt19937_64 rng(241);
  const Matrix z = test::random_matrix(5, 4, rng);
  const Matrix p = softmax_rows(z);
  const Matrix d_p = test::random_matrix(5, 4, rng);
  const Matrix d_z = softmax_backward(d_p, p);

  const double h = 1e-6;
  for (int i = 0; i < 5; ++i) {
    for (int j = 0; j < 4; ++j) {
      Matrix up = z, down = z;
      up(i, j) += h;
      down(i, j) -= h;
      const double fd = ((softmax_rows(up).array() * d_p.array()).sum() -
                         (softmax_rows(down).array() * d_p.array()).sum()) /
                        (2 * h);
      CHECK(std::abs(d_z(i, j) - fd) < 1e-6);
    }
  }
}
