#include <doctest.h>

#include <random>

#include "msgwnn/graph.hpp"
#include "test_util.hpp"

using namespace msgwnn;

namespace {
Graph k2() {
  Matrix adj(2, 2);
  adj << 0, 1, 1, 0;
  return Graph(adj, Matrix::Zero(2, 1));
}
}  // namespace

TEST_CASE("degree vector") {
  CHECK(degree_vector(k2()).isApprox(Vector::Ones(2)));

  Matrix self_loop = Matrix::Ones(1, 1);
  CHECK(degree_vector(Graph(self_loop, Matrix::Zero(1, 1)))(0) == 1.0);

  const Graph path3 = test::path_graph(3);
  Vector expected(3);
  expected << 1, 2, 1;
  CHECK(degree_vector(path3).isApprox(expected));
}

TEST_CASE("normalized laplacian on K2") {
  const LaplacianMatrix l = normalized_laplacian(k2());
  Matrix expected(2, 2);
  expected << 1, -1, -1, 1;
  CHECK((l.matrix - expected).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("normalized laplacian on single self-loop node") {
  const LaplacianMatrix l =
      normalized_laplacian(Graph(Matrix::Ones(1, 1), Matrix::Zero(1, 1)));
  CHECK(l.matrix(0, 0) == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("normalized laplacian on 3-node path") {
  // D = diag(1,2,1), so the off-diagonal couplings are -1/sqrt(2).
  const LaplacianMatrix l = normalized_laplacian(test::path_graph(3));
  const double c = 1.0 / std::sqrt(2.0);
  CHECK(l.matrix(0, 0) == doctest::Approx(1.0));
  CHECK(l.matrix(1, 1) == doctest::Approx(1.0));
  CHECK(l.matrix(2, 2) == doctest::Approx(1.0));
  CHECK(l.matrix(0, 1) == doctest::Approx(-c));
  CHECK(l.matrix(1, 2) == doctest::Approx(-c));
  CHECK(l.matrix(0, 2) == doctest::Approx(0.0));
}

TEST_CASE("isolated node is a hard error") {
  Matrix adj = Matrix::Zero(2, 2);
  adj(0, 0) = 1.0;  // node 1 isolated
  CHECK_THROWS_AS(normalized_laplacian(Graph(adj, Matrix::Zero(2, 1))),
                  ZeroDegreeNode);
}

TEST_CASE("graph invariant validation") {
  Matrix asym(2, 2);
  asym << 0, 1, 0, 0;
  CHECK_THROWS_AS(Graph(asym, Matrix::Zero(2, 1)), InvalidGraph);

  Matrix neg(2, 2);
  neg << 0, -1, -1, 0;
  CHECK_THROWS_AS(Graph(neg, Matrix::Zero(2, 1)), InvalidGraph);

  Matrix half_loop(1, 1);
  half_loop << 0.5;
  CHECK_THROWS_AS(Graph(half_loop, Matrix::Zero(1, 1)), InvalidGraph);

  Matrix ok(2, 2);
  ok << 0, 1, 1, 0;
  CHECK_THROWS_AS(Graph(ok, Matrix::Zero(3, 1)), InvalidGraph);
}

TEST_CASE("laplacian symmetry, spectrum and reconstruction on random graphs") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    std::uniform_int_distribution<int> size(2, 64);
    const int n = size(rng);
    const Graph g = test::random_connected_graph(n, 0.15, rng);
    const LaplacianMatrix l = normalized_laplacian(g);

    CHECK((l.matrix - l.matrix.transpose()).cwiseAbs().maxCoeff() <= 1e-12);

    Eigen::SelfAdjointEigenSolver<Matrix> es(l.matrix);
    CHECK(es.eigenvalues().minCoeff() >= -1e-9);
    CHECK(es.eigenvalues().maxCoeff() <= 2.0 + 1e-9);

    // A reconstructs as D^{1/2} (I - L) D^{1/2}.
    const Vector dsqrt = degree_vector(g).array().sqrt();
    const Matrix recon = dsqrt.asDiagonal() *
                         (Matrix::Identity(n, n) - l.matrix) * dsqrt.asDiagonal();
    CHECK((recon - g.adjacency()).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("hop distances") {
  const Graph path5 = test::path_graph(5);
  const auto dist = hop_distances(path5.adjacency(), 0);
  for (int i = 0; i < 5; ++i) CHECK(dist[i] == i);

  Matrix two_comp = Matrix::Zero(3, 3);
  two_comp(0, 1) = two_comp(1, 0) = 1.0;
  CHECK(hop_distances(two_comp, 0)[2] == -1);
}

TEST_CASE("sparse laplacian matches dense product and counts columns") {
  std::mt19937_64 rng(11);
  const Graph g = test::random_connected_graph(12, 0.3, rng);
  const Matrix l = normalized_laplacian(g).matrix;
  const SparseLaplacian sparse = SparseLaplacian::from_dense(l);

  const Matrix x = test::random_matrix(12, 3, rng);
  std::int64_t count = 0;
  const Matrix y = sparse.multiply(x, &count);
  CHECK((y - l * x).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(count == 3);

  CHECK_THROWS_AS(sparse.multiply(Matrix::Zero(5, 1)), DimensionMismatch);
}
