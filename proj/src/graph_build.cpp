#include "msgwnn/graph_build.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

namespace msgwnn {

SimilarityParams SimilarityParams::identity(int channels) {
  return {Matrix::Identity(channels, channels), Matrix::Identity(channels, channels)};
}

namespace {

int read_ppm_int(std::istream& in) {
  // Skips whitespace and '#' comments per the PPM grammar.
  int c = in.get();
  while (c != EOF) {
    if (c == '#') {
      while (c != EOF && c != '\n') c = in.get();
    } else if (!std::isspace(c)) {
      break;
    }
    c = in.get();
  }
  if (c == EOF || !std::isdigit(c)) throw IoError("malformed PPM header");
  int value = 0;
  while (c != EOF && std::isdigit(c)) {
    value = value * 10 + (c - '0');
    c = in.get();
  }
  return value;
}

}  // namespace

Image read_ppm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open image file: " + path);
  char magic[2];
  in.read(magic, 2);
  if (in.gcount() != 2 || magic[0] != 'P' || magic[1] != '6')
    throw IoError("not a P6 PPM file: " + path);
  Image img;
  img.width = read_ppm_int(in);
  img.height = read_ppm_int(in);
  const int maxval = read_ppm_int(in);
  if (maxval != 255) throw IoError("only maxval 255 PPM supported: " + path);
  if (img.width < 1 || img.height < 1) throw IoError("empty PPM image: " + path);
  img.pixels.resize(static_cast<std::size_t>(img.width) * img.height * 3);
  in.read(reinterpret_cast<char*>(img.pixels.data()),
          static_cast<std::streamsize>(img.pixels.size()));
  if (in.gcount() != static_cast<std::streamsize>(img.pixels.size()))
    throw IoError("truncated PPM pixel data: " + path);
  return img;
}

void write_ppm(const std::string& path, const Image& img) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write image file: " + path);
  out << "P6\n" << img.width << " " << img.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(img.pixels.data()),
            static_cast<std::streamsize>(img.pixels.size()));
  if (!out) throw IoError("failed writing PPM: " + path);
}

FeatureGrid patch_embed(const Image& image, int patch) {
  if (patch < 1) throw ArgumentError("patch size must be >= 1");
  if (image.height % patch != 0 || image.width % patch != 0)
    throw NotDivisible(image.height, image.width, patch);
  FeatureGrid grid;
  grid.height = image.height / patch;
  grid.width = image.width / patch;
  grid.values.resize(grid.node_count(), 10);

  const double area = static_cast<double>(patch) * patch;
  // Quadrant row/col ranges; for patch == 1 both halves cover the pixel.
  const int lo_end = (patch + 1) / 2;
  const int hi_begin = patch / 2;

  for (int gr = 0; gr < grid.height; ++gr) {
    for (int gc = 0; gc < grid.width; ++gc) {
      double sum[3] = {0, 0, 0};
      double sumsq[3] = {0, 0, 0};
      double luma_sum[4] = {0, 0, 0, 0};
      double luma_cnt[4] = {0, 0, 0, 0};
      for (int r = 0; r < patch; ++r) {
        for (int c = 0; c < patch; ++c) {
          const int row = gr * patch + r;
          const int col = gc * patch + c;
          double luma = 0.0;
          static const double kLumaW[3] = {0.299, 0.587, 0.114};
          for (int ch = 0; ch < 3; ++ch) {
            const double v = image.at(row, col, ch) / 255.0;
            sum[ch] += v;
            sumsq[ch] += v * v;
            luma += kLumaW[ch] * v;
          }
          const bool top = r < lo_end;
          const bool bottom = r >= hi_begin;
          const bool left = c < lo_end;
          const bool right = c >= hi_begin;
          if (top && left) { luma_sum[0] += luma; luma_cnt[0] += 1; }
          if (top && right) { luma_sum[1] += luma; luma_cnt[1] += 1; }
          if (bottom && left) { luma_sum[2] += luma; luma_cnt[2] += 1; }
          if (bottom && right) { luma_sum[3] += luma; luma_cnt[3] += 1; }
        }
      }
      const int node = gr * grid.width + gc;
      for (int ch = 0; ch < 3; ++ch) {
        const double mean = sum[ch] / area;
        const double var = std::max(0.0, sumsq[ch] / area - mean * mean);
        grid.values(node, ch) = mean;
        grid.values(node, 3 + ch) = std::sqrt(var);
      }
      for (int q = 0; q < 4; ++q) {
        grid.values(node, 6 + q) = luma_sum[q] / luma_cnt[q];
      }
    }
  }
  return grid;
}

Matrix similarity_matrix(const FeatureGrid& grid, const SimilarityParams& params) {
  if (params.theta_weight.rows() != grid.channels() ||
      params.phi_weight.rows() != grid.channels())
    throw DimensionMismatch("similarity projections must have C1 rows");
  if (params.theta_weight.cols() != params.phi_weight.cols())
    throw DimensionMismatch("theta/phi projection widths differ");
  const Matrix pt = grid.values * params.theta_weight;  // N x Cp
  const Matrix pp = grid.values * params.phi_weight;    // N x Cp
  return pt * pp.transpose();
}

double percentile_nearest_rank(const Matrix& sim, double alpha) {
  if (alpha <= 0.0 || alpha > 100.0)
    throw ArgumentError("alpha must lie in (0, 100]");
  std::vector<double> entries(sim.data(), sim.data() + sim.size());
  std::sort(entries.begin(), entries.end());
  const auto rank = static_cast<std::size_t>(
      std::ceil(alpha / 100.0 * static_cast<double>(entries.size())));
  return entries[rank - 1];
}

Matrix threshold_edges(const Matrix& sim, const EdgeRule& rule) {
  if (!sim.allFinite()) throw ValidationError("similarity matrix has non-finite entries");
  if (sim.rows() != sim.cols()) throw DimensionMismatch("similarity matrix must be square");
  const double q = percentile_nearest_rank(sim, rule.alpha);
  const int n = static_cast<int>(sim.rows());
  Matrix adj = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i == j || sim(i, j) >= q) adj(i, j) = 1.0;
    }
  }
  // Undirected graph: keep an edge when either direction qualifies.
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const double e = std::max(adj(i, j), adj(j, i));
      adj(i, j) = e;
      adj(j, i) = e;
    }
  }
  return adj;
}

Graph build_graph(const FeatureGrid& grid, const SimilarityParams& params,
                  const EdgeRule& rule) {
  const Matrix sim = similarity_matrix(grid, params);
  return Graph(threshold_edges(sim, rule), grid.values);
}

Graph build_graph(const Image& image, int patch, const SimilarityParams& params,
                  const EdgeRule& rule) {
  return build_graph(patch_embed(image, patch), params, rule);
}

}  // namespace msgwnn
