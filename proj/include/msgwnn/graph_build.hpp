#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "msgwnn/graph.hpp"

namespace msgwnn {

/// Patch features over an H' x W' grid, row-major node order
/// (node id = row * W' + col).
struct FeatureGrid {
  int height = 0;
  int width = 0;
  Matrix values;  // (height*width) x channels

  int node_count() const { return height * width; }
  int channels() const { return static_cast<int>(values.cols()); }
};

/// Learned projections behind the dot-product similarity
/// f(x_i, x_j) = (theta x_i) . (phi x_j); both are C1 x Cp.
struct SimilarityParams {
  Matrix theta_weight;
  Matrix phi_weight;

  static SimilarityParams identity(int channels);
};

/// Percentile edge rule: connect i,j when their similarity reaches the
/// alpha-th percentile of all N^2 pairwise similarities.
struct EdgeRule {
  double alpha = 99.0;
};

/// 8-bit RGB image, row-major, 3 bytes per pixel.
struct Image {
  int height = 0;
  int width = 0;
  std::vector<std::uint8_t> pixels;  // height*width*3

  std::uint8_t at(int row, int col, int chan) const {
    return pixels[static_cast<std::size_t>((row * width + col) * 3 + chan)];
  }
};

Image read_ppm(const std::string& path);
void write_ppm(const std::string& path, const Image& img);

/// Statistics-based stand-in for a learned backbone: per r x r patch emit
/// 3 channel means, 3 channel standard deviations and a 2x2 average-pooled
/// luminance block (10 channels total), all scaled to [0,1].
FeatureGrid patch_embed(const Image& image, int patch);

/// out[i][j] = (theta^T x_i) . (phi^T x_j); not symmetric in general.
Matrix similarity_matrix(const FeatureGrid& grid, const SimilarityParams& params);

/// Nearest-rank percentile over all N^2 entries (diagonal included); edges
/// where sim >= Q_alpha, OR-symmetrized, forced unit diagonal.
Matrix threshold_edges(const Matrix& sim, const EdgeRule& rule);

/// Nearest-rank percentile value itself (exposed for diagnostics/tests).
double percentile_nearest_rank(const Matrix& sim, double alpha);

Graph build_graph(const FeatureGrid& grid, const SimilarityParams& params,
                  const EdgeRule& rule);
Graph build_graph(const Image& image, int patch, const SimilarityParams& params,
                  const EdgeRule& rule);

}  // namespace msgwnn
