#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "msgwnn/model.hpp"

namespace msgwnn {

/// Planted multi-scale benchmark. Every sample lives on the same H' x W'
/// 4-neighbor lattice (self-loops included); what varies is the block
/// pattern painted on it. Class c tiles the grid with blocks of side
/// blob_scales[c mod len] and assigns each block one of two node classes,
/// balanced exactly and shuffled per sample. Classes are paired so that
/// both members of a pair draw the same two node classes: their node
/// compositions are identical and only the block geometry separates them.
/// Node embeddings are the one-hot of the node class plus Gaussian noise.
struct SynthSpec {
  int grid_h = 8;
  int grid_w = 8;
  int classes = 4;  // C2
  std::vector<int> blob_scales{1, 2, 4};
  double noise_sigma = 0.1;
  int samples_per_class = 40;
  std::uint64_t seed = 0;
};

std::vector<LabeledGraph> generate(const SynthSpec& spec);

/// 4-neighbor lattice adjacency with self-loops for an h x w grid.
Matrix lattice_adjacency(int h, int w);

/// The two node classes class `c` paints with (shared within a pair).
std::pair<int, int> synth_composition(int c, int num_classes);

/// Stratified split, deterministic given seed; train gets
/// floor(fraction * per-class count) plus largest-remainder rounding so the
/// total matches round(fraction * size).
std::pair<std::vector<LabeledGraph>, std::vector<LabeledGraph>> split(
    const std::vector<LabeledGraph>& dataset, double train_fraction,
    std::uint64_t seed);

}  // namespace msgwnn
