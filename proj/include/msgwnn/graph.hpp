#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "msgwnn/errors.hpp"

namespace msgwnn {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Undirected graph over N nodes: symmetric nonnegative adjacency with
/// {0,1} diagonal (self-loops), plus an N x C node embedding matrix.
/// Immutable after construction; the constructor validates all invariants.
class Graph {
 public:
  Graph(Matrix adjacency, Matrix embeddings);

  int node_count() const { return static_cast<int>(adj_.rows()); }
  const Matrix& adjacency() const { return adj_; }
  const Matrix& embeddings() const { return emb_; }

 private:
  Matrix adj_;
  Matrix emb_;
};

enum class LaplacianKind { normalized };

struct LaplacianMatrix {
  Matrix matrix;
  LaplacianKind kind = LaplacianKind::normalized;
};

/// D_ii = sum_j A_ij, returned as the diagonal vector.
Vector degree_vector(const Graph& g);

/// L = I - D^{-1/2} A D^{-1/2}. Throws ZeroDegreeNode for isolated nodes.
LaplacianMatrix normalized_laplacian(const Graph& g);

/// BFS hop distance from `source` over nonzero off-diagonal adjacency
/// entries; -1 for unreachable nodes.
std::vector<int> hop_distances(const Matrix& adjacency, int source);

/// CSR form of a symmetric matrix, for the O(k|E|) polynomial filter path.
/// multiply() is the only operation; the optional counter accumulates one
/// count per input column per product, which the tests use to pin the
/// operation count of the Chebyshev recurrence.
struct SparseLaplacian {
  int n = 0;
  std::vector<int> row_ptr;
  std::vector<int> col;
  std::vector<double> val;

  static SparseLaplacian from_dense(const Matrix& m, double drop_tol = 0.0);

  Matrix multiply(const Matrix& x, std::int64_t* matvec_counter = nullptr) const;
  std::int64_t nnz() const { return static_cast<std::int64_t>(val.size()); }
};

}  // namespace msgwnn
