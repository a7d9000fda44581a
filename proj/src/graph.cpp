#include "msgwnn/graph.hpp"

#include <cmath>
#include <queue>

namespace msgwnn {

Graph::Graph(Matrix adjacency, Matrix embeddings)
    : adj_(std::move(adjacency)), emb_(std::move(embeddings)) {
  const auto n = adj_.rows();
  if (n < 1) throw InvalidGraph("graph needs at least one node");
  if (adj_.cols() != n) throw InvalidGraph("adjacency must be square");
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      const double a = adj_(i, j);
      if (!std::isfinite(a)) throw InvalidGraph("adjacency entry not finite");
      if (a < 0.0) throw InvalidGraph("adjacency entry negative");
      if (adj_(i, j) != adj_(j, i))
        throw InvalidGraph("adjacency not symmetric at (" + std::to_string(i) +
                           "," + std::to_string(j) + ")");
    }
    if (adj_(i, i) != 0.0 && adj_(i, i) != 1.0)
      throw InvalidGraph("diagonal entries must be 0 or 1 (self-loops)");
  }
  if (emb_.rows() != n)
    throw InvalidGraph("embedding rows (" + std::to_string(emb_.rows()) +
                       ") must equal node count (" + std::to_string(n) + ")");
  if (!emb_.allFinite()) throw InvalidGraph("embedding entries must be finite");
}

Vector degree_vector(const Graph& g) { return g.adjacency().rowwise().sum(); }

LaplacianMatrix normalized_laplacian(const Graph& g) {
  const int n = g.node_count();
  const Vector deg = degree_vector(g);
  for (int i = 0; i < n; ++i) {
    if (deg(i) == 0.0) throw ZeroDegreeNode(i);
  }
  const Vector dinv_sqrt = deg.array().rsqrt();
  Matrix l = -(dinv_sqrt.asDiagonal() * g.adjacency() * dinv_sqrt.asDiagonal());
  l.diagonal().array() += 1.0;
  // Symmetrize away last-bit asymmetry from the two diagonal scalings.
  l = ((l + l.transpose()) * 0.5).eval();
  return LaplacianMatrix{std::move(l), LaplacianKind::normalized};
}

std::vector<int> hop_distances(const Matrix& adjacency, int source) {
  const int n = static_cast<int>(adjacency.rows());
  std::vector<int> dist(n, -1);
  std::queue<int> q;
  dist[source] = 0;
  q.push(source);
  while (!q.empty()) {
    const int u = q.front();
    q.pop();
    for (int v = 0; v < n; ++v) {
      if (v == u || adjacency(u, v) == 0.0 || dist[v] >= 0) continue;
      dist[v] = dist[u] + 1;
      q.push(v);
    }
  }
  return dist;
}

SparseLaplacian SparseLaplacian::from_dense(const Matrix& m, double drop_tol) {
  SparseLaplacian s;
  s.n = static_cast<int>(m.rows());
  s.row_ptr.reserve(s.n + 1);
  s.row_ptr.push_back(0);
  for (int i = 0; i < s.n; ++i) {
    for (int j = 0; j < s.n; ++j) {
      if (std::abs(m(i, j)) > drop_tol) {
        s.col.push_back(j);
        s.val.push_back(m(i, j));
      }
    }
    s.row_ptr.push_back(static_cast<int>(s.col.size()));
  }
  return s;
}

Matrix SparseLaplacian::multiply(const Matrix& x, std::int64_t* matvec_counter) const {
  if (x.rows() != n)
    throw DimensionMismatch("sparse multiply: expected " + std::to_string(n) +
                            " rows, got " + std::to_string(x.rows()));
  Matrix y = Matrix::Zero(n, x.cols());
  for (int i = 0; i < n; ++i) {
    for (int p = row_ptr[i]; p < row_ptr[i + 1]; ++p) {
      y.row(i) += val[p] * x.row(col[p]);
    }
  }
  if (matvec_counter) *matvec_counter += x.cols();
  return y;
}

}  // namespace msgwnn
