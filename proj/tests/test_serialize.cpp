#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "msgwnn/serialize.hpp"
#include "test_util.hpp"

using namespace msgwnn;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() : path(fs::temp_directory_path() /
                   ("msgwnn_test_" + std::to_string(std::random_device{}()))) {
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

}  // namespace

TEST_CASE("graph json round trip") {
  TempDir tmp;
  std::mt19937_64 rng(401);
  const Graph g = test::random_connected_graph(9, 0.3, rng, true, 3);
  const std::string path = tmp.file("graph.json");
  save_graph_json(path, g);
  const Graph back = load_graph_json(path);
  CHECK((back.adjacency() - g.adjacency()).cwiseAbs().maxCoeff() == 0.0);
  CHECK((back.embeddings() - g.embeddings()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("graph json validation") {
  TempDir tmp;
  auto write = [&](const std::string& name, const std::string& body) {
    std::ofstream out(tmp.file(name));
    out << body;
    return tmp.file(name);
  };

  CHECK_THROWS_AS(load_graph_json(tmp.file("missing.json")), IoError);
  CHECK_THROWS_AS(load_graph_json(write("bad.json", "{not json")), IoError);
  CHECK_THROWS_AS(load_graph_json(write("incomplete.json", R"({"n": 2})")),
                  ValidationError);
  CHECK_THROWS_AS(
      load_graph_json(write("dup.json",
                            R"({"n":2,"edges":[[0,1,1],[1,0,1]],"embeddings":[[0],[0]]})")),
      ValidationError);
  CHECK_THROWS_AS(
      load_graph_json(write("range.json",
                            R"({"n":2,"edges":[[0,5,1]],"embeddings":[[0],[0]]})")),
      ValidationError);
  // Asymmetric weights cannot be expressed; a negative weight still fails
  // the graph invariant.
  CHECK_THROWS_AS(
      load_graph_json(write("neg.json",
                            R"({"n":2,"edges":[[0,1,-1]],"embeddings":[[0],[0]]})")),
      InvalidGraph);
}

TEST_CASE("embeddings from a csv sidecar") {
  TempDir tmp;
  {
    std::ofstream csv(tmp.file("emb.csv"));
    csv << "1.5,2.0\n-3.25,0.5\n";
    std::ofstream gj(tmp.file("graph.json"));
    gj << R"({"n":2,"edges":[[0,1,1],[0,0,1],[1,1,1]],"embeddings":"emb.csv"})";
  }
  const Graph g = load_graph_json(tmp.file("graph.json"));
  CHECK(g.embeddings()(0, 0) == 1.5);
  CHECK(g.embeddings()(1, 0) == -3.25);
  CHECK(g.embeddings()(1, 1) == 0.5);

  {
    std::ofstream csv(tmp.file("short.csv"));
    csv << "1,2\n";
    std::ofstream gj(tmp.file("short.json"));
    gj << R"({"n":2,"edges":[[0,1,1]],"embeddings":"short.csv"})";
  }
  CHECK_THROWS_AS(load_graph_json(tmp.file("short.json")), ValidationError);
}

TEST_CASE("dataset round trip") {
  TempDir tmp;
  SynthSpec spec;
  spec.samples_per_class = 2;
  spec.classes = 2;
  spec.grid_h = spec.grid_w = 4;
  spec.blob_scales = {1, 2};
  spec.seed = 31;
  const auto dataset = generate(spec);
  const std::string dir = tmp.file("data");
  save_dataset(dir, dataset);
  const auto back = load_dataset(dir);
  REQUIRE(back.size() == dataset.size());
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    CHECK(back[i].graph_label == dataset[i].graph_label);
    CHECK(back[i].node_labels == dataset[i].node_labels);
    CHECK((back[i].graph.embeddings() - dataset[i].graph.embeddings())
              .cwiseAbs()
              .maxCoeff() < 1e-15);
    CHECK((back[i].graph.adjacency() - dataset[i].graph.adjacency())
              .cwiseAbs()
              .maxCoeff() == 0.0);
  }

  CHECK_THROWS_AS(load_dataset(tmp.file("nope")), IoError);
}

TEST_CASE("checkpoint round trip") {
  TempDir tmp;
  ModelConfig config;
  config.input_dim = 3;
  config.proj_dim = 2;
  config.hidden1 = 5;
  config.hidden2 = 4;
  config.num_classes = 2;
  config.node_count = 8;
  config.scales = {0.5, 1.5};
  config.mode = OperatorMode::chebyshev(3);
  config.alpha = 95.0;

  SUBCASE("gwnn model with identity readout") {
    const MsGwnnModel model = make_model(config, 55);
    const std::string path = tmp.file("model.ckpt");
    save_checkpoint(path, model);
    const MsGwnnModel back = load_checkpoint(path);
    CHECK(back.arch == ModelArch::gwnn);
    CHECK(back.nodes == 8);
    CHECK(back.mode.k == 3);
    CHECK(back.edge_rule.alpha == 95.0);
    CHECK(back.scales() == model.scales());
    CHECK(!back.readout_weight.has_value());
    const Vector a = flatten_parameters(model);
    const Vector b = flatten_parameters(back);
    REQUIRE(a.size() == b.size());
    for (int i = 0; i < a.size(); ++i) CHECK(a(i) == b(i));
  }

  SUBCASE("readout affine and exact mode survive the trip") {
    config.readout_affine = true;
    config.mode = OperatorMode::exact();
    const MsGwnnModel model = make_model(config, 56);
    const std::string path = tmp.file("model2.ckpt");
    save_checkpoint(path, model);
    const MsGwnnModel back = load_checkpoint(path);
    CHECK(back.readout_weight.has_value());
    CHECK(back.mode.kind == OperatorMode::Kind::exact);
    const Vector a = flatten_parameters(model);
    const Vector b = flatten_parameters(back);
    for (int i = 0; i < a.size(); ++i) CHECK(a(i) == b(i));
  }

  SUBCASE("gcn arch") {
    config.arch = ModelArch::gcn;
    const MsGwnnModel model = make_model(config, 57);
    const std::string path = tmp.file("gcn.ckpt");
    save_checkpoint(path, model);
    const MsGwnnModel back = load_checkpoint(path);
    CHECK(back.arch == ModelArch::gcn);
    const Vector a = flatten_parameters(model);
    const Vector b = flatten_parameters(back);
    for (int i = 0; i < a.size(); ++i) CHECK(a(i) == b(i));
  }

  SUBCASE("truncated blob is rejected") {
    const MsGwnnModel model = make_model(config, 58);
    const std::string path = tmp.file("trunc.ckpt");
    save_checkpoint(path, model);
    // Chop the file short.
    std::ifstream in(path, std::ios::binary);
    std::string bytes((std::istreambuf_iterator<char>(in)),
                      std::istreambuf_iterator<char>());
    in.close();
    std::ofstream out(path, std::ios::binary);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size() - 16));
    out.close();
    CHECK_THROWS_AS(load_checkpoint(path), IoError);
  }
}

TEST_CASE("identical checkpoints are bitwise identical") {
  TempDir tmp;
  ModelConfig config;
  config.input_dim = 3;
  config.hidden1 = 4;
  config.hidden2 = 3;
  config.num_classes = 2;
  config.node_count = 6;
  config.scales = {1.0};

  save_checkpoint(tmp.file("a.ckpt"), make_model(config, 77));
  save_checkpoint(tmp.file("b.ckpt"), make_model(config, 77));
  std::ifstream fa(tmp.file("a.ckpt"), std::ios::binary);
  std::ifstream fb(tmp.file("b.ckpt"), std::ios::binary);
  const std::string ba((std::istreambuf_iterator<char>(fa)),
                       std::istreambuf_iterator<char>());
  const std::string bb((std::istreambuf_iterator<char>(fb)),
                       std::istreambuf_iterator<char>());
  CHECK(ba == bb);
  CHECK(!ba.empty());
}

TEST_CASE("metrics and eval writers emit valid json") {
  TempDir tmp;
  std::vector<EpochMetrics> metrics(2);
  metrics[0] = {0, 1.5, 1.0, 0.5, 0.25};
  metrics[1] = {1, 1.0, 0.7, 0.3, 0.5};
  save_metrics_jsonl(tmp.file("m.jsonl"), metrics);
  std::ifstream in(tmp.file("m.jsonl"));
  std::string line;
  int lines = 0;
  while (std::getline(in, line)) {
    ++lines;
    CHECK(line.find("\"epoch\"") != std::string::npos);
    CHECK(line.find("\"loss_total\"") != std::string::npos);
    CHECK(line.find("\"train_acc\"") != std::string::npos);
  }
  CHECK(lines == 2);

  EvalResult result;
  result.accuracy = 0.75;
  result.per_class = Vector::Ones(2);
  result.confusion = Matrix::Identity(2, 2);
  save_eval_json(tmp.file("eval.json"), result);
  std::ifstream ej(tmp.file("eval.json"));
  std::string body((std::istreambuf_iterator<char>(ej)),
                   std::istreambuf_iterator<char>());
  CHECK(body.find("\"format\":1") != std::string::npos);
  CHECK(body.find("\"accuracy\":0.75") != std::string::npos);
}
