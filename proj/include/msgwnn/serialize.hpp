#pragma once

#include <string>
#include <vector>

#include "msgwnn/model.hpp"
#include "msgwnn/synth.hpp"

namespace msgwnn {

/// Graph JSON: {"n": int, "edges": [[i, j, w], ...], "embeddings": [[...]]
/// or "relative/path.csv"}. Edges appear once per unordered pair and are
/// symmetrized on load; a CSV embedding path resolves relative to the JSON
/// file's directory.
void save_graph_json(const std::string& path, const Graph& g);
Graph load_graph_json(const std::string& path);

/// N rows x C comma-separated decimal columns, row order = node index.
Matrix load_embeddings_csv(const std::string& path, int expected_rows);

/// Dataset directory layout: dataset.json manifest listing per-sample graph
/// and label-sidecar files.
void save_dataset(const std::string& dir, const std::vector<LabeledGraph>& dataset);
std::vector<LabeledGraph> load_dataset(const std::string& dir);

/// Checkpoint: one line of JSON header, then the flat parameter blob as
/// little-endian doubles in declared order (per branch W1,F1,W2,F2,W3,F3,
/// then theta, phi, then the readout affine when enabled).
void save_checkpoint(const std::string& path, const MsGwnnModel& model);
MsGwnnModel load_checkpoint(const std::string& path);

void save_metrics_jsonl(const std::string& path,
                        const std::vector<EpochMetrics>& metrics);
void save_eval_json(const std::string& path, const EvalResult& result);

}  // namespace msgwnn
