#include "msgwnn/synth.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <string>

#include "msgwnn/rng.hpp"

namespace msgwnn {

Matrix lattice_adjacency(int h, int w) {
  const int n = h * w;
  Matrix adj = Matrix::Identity(n, n);
  auto id = [w](int r, int c) { return r * w + c; };
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      if (r + 1 < h) {
        adj(id(r, c), id(r + 1, c)) = 1.0;
        adj(id(r + 1, c), id(r, c)) = 1.0;
      }
      if (c + 1 < w) {
        adj(id(r, c), id(r, c + 1)) = 1.0;
        adj(id(r, c + 1), id(r, c)) = 1.0;
      }
    }
  }
  return adj;
}

std::pair<int, int> synth_composition(int c, int num_classes) {
  const int base = (c / 2) * 2;
  return {base, std::min(base + 1, num_classes - 1)};
}

std::vector<LabeledGraph> generate(const SynthSpec& spec) {
  if (spec.grid_h < 1 || spec.grid_w < 1) throw InvalidSpec("grid dims must be >= 1");
  if (spec.classes < 1) throw InvalidSpec("need at least one class");
  if (spec.samples_per_class < 1) throw InvalidSpec("samples_per_class must be >= 1");
  if (spec.blob_scales.empty()) throw InvalidSpec("blob_scales must be non-empty");
  if (!(spec.noise_sigma >= 0.0)) throw InvalidSpec("noise_sigma must be >= 0");
  for (int b : spec.blob_scales) {
    if (b < 1 || spec.grid_h % b != 0 || spec.grid_w % b != 0)
      throw InvalidSpec("blob size " + std::to_string(b) +
                        " must divide grid " + std::to_string(spec.grid_h) + "x" +
                        std::to_string(spec.grid_w));
  }

  const int n = spec.grid_h * spec.grid_w;
  const Matrix adjacency = lattice_adjacency(spec.grid_h, spec.grid_w);

  std::vector<LabeledGraph> dataset;
  dataset.reserve(static_cast<std::size_t>(spec.classes) * spec.samples_per_class);
  for (int c = 0; c < spec.classes; ++c) {
    const int blob = spec.blob_scales[c % spec.blob_scales.size()];
    const auto [class_a, class_b] = synth_composition(c, spec.classes);
    const int blocks_h = spec.grid_h / blob;
    const int blocks_w = spec.grid_w / blob;
    const int num_blocks = blocks_h * blocks_w;

    for (int s = 0; s < spec.samples_per_class; ++s) {
      auto rng = make_rng(spec.seed, "synth/" + std::to_string(c) + "/" +
                                         std::to_string(s));
      // Balanced block assignment: half class_a, half class_b (extra block
      // to class_a when odd), shuffled per sample.
      std::vector<int> block_class(num_blocks, class_a);
      for (int k = num_blocks / 2; k < num_blocks; ++k) block_class[k] = class_b;
      std::shuffle(block_class.begin(), block_class.end(), rng);

      std::vector<int> node_labels(n);
      for (int r = 0; r < spec.grid_h; ++r) {
        for (int col = 0; col < spec.grid_w; ++col) {
          const int block = (r / blob) * blocks_w + (col / blob);
          node_labels[r * spec.grid_w + col] = block_class[block];
        }
      }

      Matrix emb = Matrix::Zero(n, spec.classes);
      for (int i = 0; i < n; ++i) emb(i, node_labels[i]) = 1.0;
      if (spec.noise_sigma > 0.0) {
        std::normal_distribution<double> noise(0.0, spec.noise_sigma);
        for (int i = 0; i < n; ++i)
          for (int j = 0; j < spec.classes; ++j) emb(i, j) += noise(rng);
      }

      dataset.push_back(LabeledGraph{Graph(adjacency, std::move(emb)),
                                     std::move(node_labels), c});
    }
  }
  return dataset;
}

std::pair<std::vector<LabeledGraph>, std::vector<LabeledGraph>> split(
    const std::vector<LabeledGraph>& dataset, double train_fraction,
    std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0))
    throw ArgumentError("train fraction must lie in (0, 1)");

  std::map<int, std::vector<int>> by_class;
  for (std::size_t i = 0; i < dataset.size(); ++i)
    by_class[dataset[i].graph_label].push_back(static_cast<int>(i));
  for (const auto& [label, idx] : by_class) {
    if (idx.size() < 2)
      throw ClassTooSmall("class " + std::to_string(label) +
                          " has fewer than 2 samples");
  }

  // Per-class floor counts, then largest fractional remainder until the
  // total hits round(fraction * size). Ties resolve by class id.
  const int total_target = static_cast<int>(
      std::llround(train_fraction * static_cast<double>(dataset.size())));
  std::map<int, int> take;
  std::vector<std::pair<double, int>> remainders;
  int allocated = 0;
  for (const auto& [label, idx] : by_class) {
    const double exact = train_fraction * static_cast<double>(idx.size());
    take[label] = static_cast<int>(std::floor(exact));
    allocated += take[label];
    remainders.push_back({exact - std::floor(exact), label});
  }
  std::sort(remainders.begin(), remainders.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  for (int extra = total_target - allocated; extra > 0; --extra) {
    const int label = remainders[static_cast<std::size_t>(total_target - allocated -
                                                          extra)].second;
    take[label] += 1;
  }

  std::pair<std::vector<LabeledGraph>, std::vector<LabeledGraph>> out;
  auto rng = make_rng(seed, "split");
  for (auto& [label, idx] : by_class) {
    std::shuffle(idx.begin(), idx.end(), rng);
    const int k = std::min<int>(take[label], static_cast<int>(idx.size()) - 1);
    for (std::size_t p = 0; p < idx.size(); ++p) {
      (static_cast<int>(p) < k ? out.first : out.second).push_back(dataset[idx[p]]);
    }
  }
  return out;
}

}  // namespace msgwnn
