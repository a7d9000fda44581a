#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "msgwnn/graph_build.hpp"
#include "msgwnn/model.hpp"
#include "msgwnn/serialize.hpp"
#include "msgwnn/spectral.hpp"
#include "msgwnn/synth.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace msgwnn;

namespace {

std::vector<double> parse_double_list(const std::string& text, const char* what) {
  std::vector<double> values;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    try {
      values.push_back(std::stod(item));
    } catch (const std::exception&) {
      throw ArgumentError(std::string("bad ") + what + " value: " + item);
    }
  }
  if (values.empty()) throw ArgumentError(std::string("empty ") + what + " list");
  return values;
}

std::vector<int> parse_int_list(const std::string& text, const char* what) {
  std::vector<int> values;
  for (double v : parse_double_list(text, what)) values.push_back(static_cast<int>(v));
  return values;
}

void require_file(const std::string& path) {
  if (!fs::exists(path)) throw IoError("file not found: " + path);
}

void require_dataset_dir(const std::string& dir) {
  if (!fs::exists(fs::path(dir) / "dataset.json"))
    throw IoError("dataset manifest not found: " +
                  (fs::path(dir) / "dataset.json").string());
}

void configure(CLI::App& app) {
  app.set_config("--config", "", "flat key=value config file; flags win");
  app.allow_config_extras(CLI::config_extras_mode::error);
}

std::string format_scale(double s) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", s);
  return buf;
}

/// -1 when parsing succeeded, otherwise the process exit code
/// (0 for --help, 2 for any argument or config error).
int parse_cli(CLI::App& app, int argc, char** argv) {
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      app.exit(e);
      return 0;
    }
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return -1;
}

void write_or_print(const std::string& out_path, const json& j) {
  if (out_path.empty()) {
    std::cout << j.dump() << "\n";
  } else {
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw IoError("cannot write output: " + out_path);
    out << j.dump() << "\n";
  }
}

struct ModelFlags {
  std::string scales = "0.5,1.0,1.5";
  std::string hidden = "256,128";
  std::string arch = "gwnn";
  std::string mode = "chebyshev";
  int k = 2;
  int proj_dim = 0;
  double alpha = 99.0;
  bool readout_affine = false;
  bool rebuild_topology = false;

  void add_to(CLI::App& app) {
    app.add_option("--scales", scales, "branch scales, comma separated");
    app.add_option("--hidden", hidden, "hidden layer widths, comma separated");
    app.add_option("--arch", arch)->check(CLI::IsMember({"gwnn", "gcn"}));
    app.add_option("--mode", mode)->check(CLI::IsMember({"chebyshev", "exact"}));
    app.add_option("--k", k, "Chebyshev order")->check(CLI::PositiveNumber);
    app.add_option("--proj-dim", proj_dim, "similarity projection width (0 = C1)");
    app.add_option("--alpha", alpha, "edge percentile")
        ->check(CLI::Range(std::nextafter(0.0, 1.0), 100.0));
    app.add_flag("--readout-affine", readout_affine, "trainable readout affine");
    app.add_flag("--rebuild-topology", rebuild_topology,
                 "recompute edges from the similarity each forward pass");
  }

  ModelConfig to_config(int input_dim, int num_classes, int node_count) const {
    ModelConfig config;
    config.input_dim = input_dim;
    config.num_classes = num_classes;
    config.node_count = node_count;
    config.proj_dim = proj_dim;
    const auto h = parse_int_list(hidden, "hidden");
    if (h.size() != 2) throw ArgumentError("--hidden expects two widths");
    config.hidden1 = h[0];
    config.hidden2 = h[1];
    config.scales = parse_double_list(scales, "scales");
    config.mode = mode == "exact" ? OperatorMode::exact() : OperatorMode::chebyshev(k);
    config.alpha = alpha;
    config.readout_affine = readout_affine;
    config.rebuild_topology = rebuild_topology;
    config.arch = arch == "gcn" ? ModelArch::gcn : ModelArch::gwnn;
    return config;
  }
};

struct TrainFlags {
  double lambda = 1.0;
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.99;
  int epochs = 200;
  int batch = 16;
  std::uint64_t seed = 0;
  double train_fraction = 0.7;

  void add_to(CLI::App& app) {
    app.add_option("--lambda", lambda, "node-loss weight")
        ->check(CLI::NonNegativeNumber);
    app.add_option("--lr", lr, "learning rate")->check(CLI::PositiveNumber);
    app.add_option("--beta1", beta1)->check(CLI::Range(0.0, 1.0));
    app.add_option("--beta2", beta2)->check(CLI::Range(0.0, 1.0));
    app.add_option("--epochs", epochs)->check(CLI::PositiveNumber);
    app.add_option("--batch", batch)->check(CLI::PositiveNumber);
    app.add_option("--seed", seed);
    app.add_option("--train-fraction", train_fraction)
        ->check(CLI::Range(std::nextafter(0.0, 1.0), std::nextafter(1.0, 0.0)));
  }

  TrainConfig to_config(int chebyshev_k) const {
    TrainConfig config;
    config.lambda = lambda;
    config.learning_rate = lr;
    config.beta1 = beta1;
    config.beta2 = beta2;
    config.epochs = epochs;
    config.batch_size = batch;
    config.chebyshev_k = chebyshev_k;
    config.seed = seed;
    return config;
  }
};

struct DatasetDims {
  int input_dim = 0;
  int num_classes = 0;
  int node_count = 0;
};

DatasetDims dims_of(const std::vector<LabeledGraph>& dataset) {
  DatasetDims dims;
  dims.input_dim = static_cast<int>(dataset.front().graph.embeddings().cols());
  dims.node_count = dataset.front().graph.node_count();
  for (const auto& ex : dataset) {
    dims.num_classes = std::max(dims.num_classes, ex.graph_label + 1);
    for (int y : ex.node_labels) dims.num_classes = std::max(dims.num_classes, y + 1);
  }
  return dims;
}

int cmd_build_graph(int argc, char** argv) {
  CLI::App app{"build a percentile-threshold graph from an image"};
  configure(app);
  std::string image_path, out_path;
  int patch = 16;
  double alpha = 99.0;
  app.add_option("--image", image_path, "P6 PPM image")->required();
  app.add_option("--patch", patch, "patch side length")->check(CLI::PositiveNumber);
  app.add_option("--alpha", alpha, "edge percentile")
      ->check(CLI::Range(std::nextafter(0.0, 1.0), 100.0));
  app.add_option("--out", out_path, "output graph JSON")->required();
  if (const int rc = parse_cli(app, argc, argv); rc >= 0) return rc;

  require_file(image_path);
  const Image image = read_ppm(image_path);
  const FeatureGrid grid = patch_embed(image, patch);
  const Graph g =
      build_graph(grid, SimilarityParams::identity(grid.channels()), EdgeRule{alpha});
  save_graph_json(out_path, g);
  std::cout << json{{"format", 1},
                    {"nodes", g.node_count()},
                    {"edges",
                     static_cast<long>((g.adjacency().sum() - g.node_count()) / 2)},
                    {"out", out_path}}
                   .dump()
            << "\n";
  return 0;
}

int cmd_wavelet(int argc, char** argv) {
  CLI::App app{"dump wavelet columns and receptive-field summaries"};
  configure(app);
  std::string graph_path, out_prefix, scales_text = "1,3,5";
  int center = 0;
  double threshold = 1e-3;
  app.add_option("--graph", graph_path, "graph JSON")->required();
  app.add_option("--scales", scales_text, "scales, comma separated");
  app.add_option("--center", center, "center node")->required();
  app.add_option("--threshold", threshold, "CSV cutoff on |value|");
  app.add_option("--out-prefix", out_prefix, "output file prefix")->required();
  if (const int rc = parse_cli(app, argc, argv); rc >= 0) return rc;

  require_file(graph_path);
  const Graph g = load_graph_json(graph_path);
  if (center < 0 || center >= g.node_count())
    throw ValidationError("center " + std::to_string(center) + " out of range for " +
                          std::to_string(g.node_count()) + " nodes");
  const SpectralDecomposition sd = eigendecompose(normalized_laplacian(g));
  const auto dist = hop_distances(g.adjacency(), center);

  for (double s : parse_double_list(scales_text, "scales")) {
    const WaveletOperatorPair pair = wavelet_basis_exact(sd, s);
    const Vector column = pair.forward.col(center);

    const std::string csv_path = out_prefix + "_s" + format_scale(s) + ".csv";
    std::ofstream csv(csv_path, std::ios::binary);
    if (!csv) throw IoError("cannot write output: " + csv_path);
    csv << "node_index,wavelet_value\n";
    for (int j = 0; j < g.node_count(); ++j) {
      if (std::abs(column(j)) > threshold) csv << j << "," << column(j) << "\n";
    }

    const double total_mass = column.cwiseAbs().sum();
    double hop1 = 0.0, hop2 = 0.0;
    for (int j = 0; j < g.node_count(); ++j) {
      if (dist[j] >= 0 && dist[j] <= 1) hop1 += std::abs(column(j));
      if (dist[j] >= 0 && dist[j] <= 2) hop2 += std::abs(column(j));
    }
    json summary{{"format", 1},
                 {"scale", s},
                 {"center", center},
                 {"support_size_at_1e-3",
                  static_cast<long>(receptive_field(pair, center, 1e-3).size())},
                 {"mass_within_1hop", total_mass > 0 ? hop1 / total_mass : 0.0},
                 {"mass_within_2hop", total_mass > 0 ? hop2 / total_mass : 0.0}};
    write_or_print(out_prefix + "_s" + format_scale(s) + ".json", summary);
  }
  return 0;
}

int cmd_synth(int argc, char** argv) {
  CLI::App app{"generate the planted multi-scale benchmark"};
  configure(app);
  std::string grid = "8x8", blob_scales = "1,2,4", out_dir;
  SynthSpec spec;
  app.add_option("--grid", grid, "grid as HxW");
  app.add_option("--classes", spec.classes)->check(CLI::PositiveNumber);
  app.add_option("--blob-scales", blob_scales, "block sizes, comma separated");
  app.add_option("--noise", spec.noise_sigma)->check(CLI::NonNegativeNumber);
  app.add_option("--samples-per-class", spec.samples_per_class)
      ->check(CLI::PositiveNumber);
  app.add_option("--seed", spec.seed);
  app.add_option("--out", out_dir, "output dataset directory")->required();
  if (const int rc = parse_cli(app, argc, argv); rc >= 0) return rc;

  const auto x = grid.find('x');
  if (x == std::string::npos) throw ArgumentError("--grid expects HxW, got " + grid);
  try {
    spec.grid_h = std::stoi(grid.substr(0, x));
    spec.grid_w = std::stoi(grid.substr(x + 1));
  } catch (const std::exception&) {
    throw ArgumentError("--grid expects HxW, got " + grid);
  }
  spec.blob_scales = parse_int_list(blob_scales, "blob-scales");

  const auto dataset = generate(spec);
  save_dataset(out_dir, dataset);
  std::cout << json{{"format", 1},
                    {"samples", dataset.size()},
                    {"classes", spec.classes},
                    {"out", out_dir}}
                   .dump()
            << "\n";
  return 0;
}

int cmd_train(int argc, char** argv) {
  CLI::App app{"train a model on a dataset directory"};
  configure(app);
  std::string data_dir, out_path, metrics_path;
  ModelFlags model_flags;
  TrainFlags train_flags;
  app.add_option("--data", data_dir, "dataset directory")->required();
  app.add_option("--out", out_path, "checkpoint output")->required();
  app.add_option("--metrics", metrics_path, "per-epoch metrics JSONL");
  model_flags.add_to(app);
  train_flags.add_to(app);
  if (const int rc = parse_cli(app, argc, argv); rc >= 0) return rc;

  require_dataset_dir(data_dir);
  const auto dataset = load_dataset(data_dir);
  const auto [train_set, test_set] =
      split(dataset, train_flags.train_fraction, train_flags.seed);
  const DatasetDims dims = dims_of(dataset);

  MsGwnnModel model = make_model(
      model_flags.to_config(dims.input_dim, dims.num_classes, dims.node_count),
      train_flags.seed);
  const TrainResult result =
      train(std::move(model), train_set, train_flags.to_config(model_flags.k));

  save_checkpoint(out_path, result.model);
  if (!metrics_path.empty()) save_metrics_jsonl(metrics_path, result.metrics);

  const EpochMetrics& last = result.metrics.back();
  std::cout << json{{"format", 1},
                    {"epochs", static_cast<int>(result.metrics.size())},
                    {"train_size", train_set.size()},
                    {"final_loss", last.loss_total},
                    {"final_train_acc", last.train_acc},
                    {"checkpoint", out_path}}
                   .dump()
            << "\n";
  return 0;
}

int cmd_eval(int argc, char** argv) {
  CLI::App app{"evaluate a checkpoint on a dataset split"};
  configure(app);
  std::string data_dir, model_path, out_path, split_name = "test";
  double train_fraction = 0.7;
  std::uint64_t seed = 0;
  app.add_option("--data", data_dir, "dataset directory")->required();
  app.add_option("--model", model_path, "checkpoint")->required();
  app.add_option("--out", out_path, "output JSON (stdout when omitted)");
  app.add_option("--split", split_name)
      ->check(CLI::IsMember({"train", "test", "all"}));
  app.add_option("--train-fraction", train_fraction)
      ->check(CLI::Range(std::nextafter(0.0, 1.0), std::nextafter(1.0, 0.0)));
  app.add_option("--seed", seed, "split seed (match the training run)");
  if (const int rc = parse_cli(app, argc, argv); rc >= 0) return rc;

  require_dataset_dir(data_dir);
  require_file(model_path);
  const auto dataset = load_dataset(data_dir);
  const MsGwnnModel model = load_checkpoint(model_path);

  std::vector<LabeledGraph> subset;
  if (split_name == "all") {
    subset = dataset;
  } else {
    auto [train_set, test_set] = split(dataset, train_fraction, seed);
    subset = split_name == "train" ? std::move(train_set) : std::move(test_set);
  }

  const EvalResult result = evaluate(model, subset);
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
  write_or_print(out_path, json{{"format", 1},
                                {"split", split_name},
                                {"count", subset.size()},
                                {"accuracy", result.accuracy},
                                {"per_class", std::move(per_class)},
                                {"confusion", std::move(confusion)}});
  return 0;
}

int cmd_ablate(int argc, char** argv) {
  CLI::App app{"scale or lambda ablation sweeps"};
  configure(app);
  std::string data_dir, out_path, param = "scales";
  std::string sets_text = "0.5|1.0|1.5|0.5,1.0|0.5,1.5|1.0,1.5|0.5,1.0,1.5";
  std::string lambdas_text = "0.01,0.1,1,10,100";
  bool include_gcn = true;
  ModelFlags model_flags;
  TrainFlags train_flags;
  app.add_option("--data", data_dir, "dataset directory")->required();
  app.add_option("--out", out_path, "output JSON (stdout when omitted)");
  app.add_option("--param", param)->check(CLI::IsMember({"scales", "lambda"}));
  app.add_option("--sets", sets_text, "scale sets, | separated");
  app.add_option("--lambdas", lambdas_text, "lambda grid, comma separated");
  app.add_flag("--include-gcn,!--no-gcn", include_gcn,
               "add the GCN baseline row to the scales report");
  model_flags.add_to(app);
  train_flags.add_to(app);
  if (const int rc = parse_cli(app, argc, argv); rc >= 0) return rc;

  require_dataset_dir(data_dir);
  const auto dataset = load_dataset(data_dir);
  const auto [train_set, test_set] =
      split(dataset, train_flags.train_fraction, train_flags.seed);
  const DatasetDims dims = dims_of(dataset);
  const ModelConfig base =
      model_flags.to_config(dims.input_dim, dims.num_classes, dims.node_count);
  const TrainConfig tc = train_flags.to_config(model_flags.k);

  json rows = json::array();
  if (param == "scales") {
    std::vector<std::vector<double>> scale_sets;
    std::stringstream ss(sets_text);
    std::string set_text;
    while (std::getline(ss, set_text, '|')) {
      if (!set_text.empty())
        scale_sets.push_back(parse_double_list(set_text, "scales"));
    }
    const auto table = ablate_scales(scale_sets, train_set, test_set, base, tc);
    for (const auto& row : table)
      rows.push_back(json{{"scales", row.scales}, {"accuracy", row.accuracy}});
    if (include_gcn) {
      ModelConfig gcn_config = base;
      gcn_config.arch = ModelArch::gcn;
      const TrainResult trained = train(make_model(gcn_config, tc.seed), train_set, tc);
      const EvalResult eval = evaluate(trained.model, test_set);
      rows.push_back(json{{"scales", "gcn"}, {"accuracy", eval.accuracy}});
    }
  } else {
    for (double lambda : parse_double_list(lambdas_text, "lambdas")) {
      TrainConfig run = tc;
      run.lambda = lambda;
      const TrainResult trained = train(make_model(base, run.seed), train_set, run);
      const EvalResult eval = evaluate(trained.model, test_set);
      rows.push_back(json{{"lambda", lambda}, {"accuracy", eval.accuracy}});
    }
  }
  write_or_print(out_path, json{{"format", 1}, {"param", param}, {"rows", rows}});
  return 0;
}

void print_usage() {
  std::cout << "usage: msgwnn <command> [options]\n"
            << "commands:\n"
            << "  build-graph   image -> percentile-threshold graph JSON\n"
            << "  wavelet       wavelet columns and receptive-field summaries\n"
            << "  synth         generate the planted multi-scale benchmark\n"
            << "  train         train a model on a dataset directory\n"
            << "  eval          evaluate a checkpoint\n"
            << "  ablate        scale / lambda ablation sweeps\n"
            << "run 'msgwnn <command> --help' for options\n";
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    print_usage();
    return 2;
  }
  const std::string command = argv[1];
  if (command == "--help" || command == "-h" || command == "help") {
    print_usage();
    return 0;
  }
  try {
    if (command == "build-graph") return cmd_build_graph(argc - 1, argv + 1);
    if (command == "wavelet") return cmd_wavelet(argc - 1, argv + 1);
    if (command == "synth") return cmd_synth(argc - 1, argv + 1);
    if (command == "train") return cmd_train(argc - 1, argv + 1);
    if (command == "eval") return cmd_eval(argc - 1, argv + 1);
    if (command == "ablate") return cmd_ablate(argc - 1, argv + 1);
    std::cerr << "unknown command: " << command << "\n";
    print_usage();
    return 2;
  } catch (const ArgumentError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "unexpected error: " << e.what() << "\n";
    return 1;
  }
}
