#include "msgwnn/serialize.hpp"

#include <bit>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace msgwnn {

namespace fs = std::filesystem;
using nlohmann::json;

static_assert(std::endian::native == std::endian::little,
              "checkpoint blobs are written as raw little-endian doubles");

namespace {

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw IoError("malformed JSON in " + path + ": " + e.what());
  }
  return j;
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write file: " + path);
  out << text;
  if (!out) throw IoError("failed writing file: " + path);
}

}  // namespace

void save_graph_json(const std::string& path, const Graph& g) {
  const int n = g.node_count();
  json edges = json::array();
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      if (g.adjacency()(i, j) != 0.0)
        edges.push_back(json::array({i, j, g.adjacency()(i, j)}));
    }
  }
  json emb = json::array();
  for (int i = 0; i < n; ++i) {
    json row = json::array();
    for (int c = 0; c < g.embeddings().cols(); ++c) row.push_back(g.embeddings()(i, c));
    emb.push_back(std::move(row));
  }
  json j{{"format", 1}, {"n", n}, {"edges", std::move(edges)},
         {"embeddings", std::move(emb)}};
  write_text_file(path, j.dump() + "\n");
}

Matrix load_embeddings_csv(const std::string& path, int expected_rows) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open embeddings CSV: " + path);
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        row.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw IoError("bad CSV value '" + cell + "' in " + path);
      }
    }
    if (!rows.empty() && row.size() != rows.front().size())
      throw IoError("ragged CSV rows in " + path);
    rows.push_back(std::move(row));
  }
  if (static_cast<int>(rows.size()) != expected_rows)
    throw ValidationError("embeddings CSV has " + std::to_string(rows.size()) +
                          " rows, expected " + std::to_string(expected_rows));
  Matrix m(rows.size(), rows.empty() ? 0 : rows.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t c = 0; c < rows[i].size(); ++c) m(i, c) = rows[i][c];
  return m;
}

Graph load_graph_json(const std::string& path) {
  const json j = read_json_file(path);
  if (!j.contains("n") || !j.contains("edges") || !j.contains("embeddings"))
    throw ValidationError("graph JSON needs n, edges and embeddings: " + path);
  const int n = j.at("n").get<int>();
  if (n < 1) throw ValidationError("graph JSON has n < 1: " + path);

  Matrix adj = Matrix::Zero(n, n);
  for (const auto& e : j.at("edges")) {
    if (!e.is_array() || e.size() != 3)
      throw ValidationError("edge entries must be [i, j, w]: " + path);
    const int i = e[0].get<int>();
    const int k = e[1].get<int>();
    const double w = e[2].get<double>();
    if (i < 0 || i >= n || k < 0 || k >= n)
      throw ValidationError("edge endpoint out of range in " + path);
    if (adj(i, k) != 0.0)
      throw ValidationError("duplicate edge (" + std::to_string(i) + "," +
                            std::to_string(k) + ") in " + path);
    adj(i, k) = w;
    adj(k, i) = w;
  }

  Matrix emb;
  const auto& je = j.at("embeddings");
  if (je.is_string()) {
    const fs::path csv = fs::path(path).parent_path() / je.get<std::string>();
    emb = load_embeddings_csv(csv.string(), n);
  } else {
    if (static_cast<int>(je.size()) != n)
      throw ValidationError("embedding row count mismatch in " + path);
    const int cols = je.empty() ? 0 : static_cast<int>(je[0].size());
    emb.resize(n, cols);
    for (int i = 0; i < n; ++i) {
      if (static_cast<int>(je[i].size()) != cols)
        throw ValidationError("ragged embedding rows in " + path);
      for (int c = 0; c < cols; ++c) emb(i, c) = je[i][c].get<double>();
    }
  }
  return Graph(std::move(adj), std::move(emb));
}

void save_dataset(const std::string& dir, const std::vector<LabeledGraph>& dataset) {
  fs::create_directories(dir);
  json samples = json::array();
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    char base[32];
    std::snprintf(base, sizeof(base), "sample_%04zu", i);
    const std::string graph_file = std::string(base) + ".graph.json";
    const std::string label_file = std::string(base) + ".labels.json";
    save_graph_json((fs::path(dir) / graph_file).string(), dataset[i].graph);
    json labels{{"format", 1},
                {"graph_label", dataset[i].graph_label},
                {"node_labels", dataset[i].node_labels}};
    write_text_file((fs::path(dir) / label_file).string(), labels.dump() + "\n");
    samples.push_back(json{{"graph", graph_file}, {"labels", label_file}});
  }
  json manifest{{"format", 1}, {"samples", std::move(samples)}};
  write_text_file((fs::path(dir) / "dataset.json").string(), manifest.dump() + "\n");
}

std::vector<LabeledGraph> load_dataset(const std::string& dir) {
  const fs::path manifest_path = fs::path(dir) / "dataset.json";
  const json manifest = read_json_file(manifest_path.string());
  if (!manifest.contains("samples"))
    throw ValidationError("dataset manifest lacks samples: " + manifest_path.string());
  std::vector<LabeledGraph> dataset;
  for (const auto& s : manifest.at("samples")) {
    Graph g = load_graph_json((fs::path(dir) / s.at("graph").get<std::string>()).string());
    const json labels =
        read_json_file((fs::path(dir) / s.at("labels").get<std::string>()).string());
    LabeledGraph ex{std::move(g), labels.at("node_labels").get<std::vector<int>>(),
                    labels.at("graph_label").get<int>()};
    if (static_cast<int>(ex.node_labels.size()) != ex.graph.node_count())
      throw ValidationError("label sidecar node count mismatch in " + dir);
    dataset.push_back(std::move(ex));
  }
  if (dataset.empty()) throw ValidationError("dataset is empty: " + dir);
  return dataset;
}

void save_checkpoint(const std::string& path, const MsGwnnModel& model) {
  json header;
  header["format"] = 1;
  header["arch"] = model.arch == ModelArch::gwnn ? "gwnn" : "gcn";
  header["input_dim"] = model.input_dim();
  header["proj_dim"] = model.proj_dim();
  json hidden = json::array();
  for (std::size_t l = 0; l + 1 < model.branches.front().layers.size(); ++l)
    hidden.push_back(model.branches.front().layers[l].weight.cols());
  header["hidden"] = std::move(hidden);
  header["classes"] = model.num_classes();
  header["nodes"] = model.nodes;
  header["scales"] = model.scales();
  header["mode"] =
      model.mode.kind == OperatorMode::Kind::exact ? "exact" : "chebyshev";
  header["k"] = model.mode.k;
  header["alpha"] = model.edge_rule.alpha;
  header["readout"] = model.readout_weight.has_value();
  header["rebuild_topology"] = model.rebuild_topology;

  const Vector flat = flatten_parameters(model);
  header["param_count"] = flat.size();

  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write checkpoint: " + path);
  out << header.dump() << "\n";
  out.write(reinterpret_cast<const char*>(flat.data()),
            static_cast<std::streamsize>(sizeof(double) * flat.size()));
  if (!out) throw IoError("failed writing checkpoint: " + path);
}

MsGwnnModel load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint: " + path);
  std::string header_line;
  if (!std::getline(in, header_line))
    throw IoError("checkpoint missing header: " + path);
  json header;
  try {
    header = json::parse(header_line);
  } catch (const json::exception& e) {
    throw IoError("malformed checkpoint header in " + path + ": " + e.what());
  }

  ModelConfig config;
  config.arch = header.at("arch").get<std::string>() == "gcn" ? ModelArch::gcn
                                                              : ModelArch::gwnn;
  config.input_dim = header.at("input_dim").get<int>();
  config.proj_dim = header.at("proj_dim").get<int>();
  const auto hidden = header.at("hidden").get<std::vector<int>>();
  if (hidden.size() != 2)
    throw ValidationError("checkpoint expects two hidden layers: " + path);
  config.hidden1 = hidden[0];
  config.hidden2 = hidden[1];
  config.num_classes = header.at("classes").get<int>();
  config.node_count = header.at("nodes").get<int>();
  config.scales = header.at("scales").get<std::vector<double>>();
  config.mode = header.at("mode").get<std::string>() == "exact"
                    ? OperatorMode::exact()
                    : OperatorMode::chebyshev(header.at("k").get<int>());
  config.alpha = header.at("alpha").get<double>();
  config.readout_affine = header.at("readout").get<bool>();
  config.rebuild_topology = header.at("rebuild_topology").get<bool>();
  if (config.arch == ModelArch::gcn) config.scales = {1.0};

  MsGwnnModel model = make_model(config, 0);
  const auto expected = header.at("param_count").get<Eigen::Index>();
  if (expected != parameter_count(model))
    throw ValidationError("checkpoint parameter count mismatch: " + path);
  Vector flat(expected);
  in.read(reinterpret_cast<char*>(flat.data()),
          static_cast<std::streamsize>(sizeof(double) * flat.size()));
  if (in.gcount() != static_cast<std::streamsize>(sizeof(double) * flat.size()))
    throw IoError("checkpoint blob truncated: " + path);
  set_parameters(model, flat);
  return model;
}

void save_metrics_jsonl(const std::string& path,
                        const std::vector<EpochMetrics>& metrics) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write metrics: " + path);
  for (const auto& m : metrics) {
    json j{{"epoch", m.epoch},
           {"loss_total", m.loss_total},
           {"loss_node", m.loss_node},
           {"loss_graph", m.loss_graph},
           {"train_acc", m.train_acc}};
    out << j.dump() << "\n";
  }
  if (!out) throw IoError("failed writing metrics: " + path);
}

void save_eval_json(const std::string& path, const EvalResult& result) {
  json per_class = json::array();
  for (int c = 0; c < result.per_class.size(); ++c)
    per_class.push_back(result.per_class(c));
  json confusion = json::array();
  for (int r = 0; r < result.confusion.rows(); ++r) {
    json row = json::array();
    for (int c = 0; c < result.confusion.cols(); ++c)
      row.push_back(result.confusion(r, c));
    confusion.push_back(std::move(row));
  }
  json j{{"format", 1},
         {"accuracy", result.accuracy},
         {"per_class", std::move(per_class)},
         {"confusion", std::move(confusion)}};
  write_text_file(path, j.dump() + "\n");
}

}  // namespace msgwnn
