#include <filesystem>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include "commands.hpp"
#include "cvnn/backprop.hpp"
#include "doctest.h"

using namespace cvnn;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "cvnn");
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class TempDir {
 public:
  TempDir() : path_(fs::temp_directory_path() / ("cvnn_cli_" + std::to_string(::getpid()) + "_" + std::to_string(counter_++))) {
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  std::string operator/(const std::string& name) const { return (path_ / name).string(); }

 private:
  static inline int counter_ = 0;
  fs::path path_;
};

}  // namespace

TEST_CASE("gradcheck on a fresh complex tanh net") {
  const Result r = run_cli({"gradcheck", "--inputs", "3", "--layers", "4,2", "--activation", "ctanh", "--seed", "1"});
  CHECK(r.code == 0);
  REQUIRE(r.out.rfind("PASS max_rel_err=", 0) == 0);
  const double err = std::stod(r.out.substr(17));
  CHECK(err <= 1e-5);
}

TEST_CASE("train with zero epochs writes the initial model and a bare header") {
  TempDir dir;
  REQUIRE(run_cli({"gen-data", "--task", "rotation", "--n", "16", "--data", dir / "d.json"}).code == 0);
  const Result r = run_cli({"train", "--data", dir / "d.json", "--model", dir / "m.json", "--epochs", "0",
                            "--metrics", dir / "m.csv", "--seed", "3", "--layers", "2,1"});
  REQUIRE(r.code == 0);
  CHECK(slurp(dir / "m.csv") == "epoch,loss,accuracy,wall_ms\n");
  NetworkSpec spec;
  spec.inputs = 1;
  spec.widths = {2, 1};
  spec.seed = 3;
  CHECK(deserialize(slurp(dir / "m.json")) == make_network(spec));
}

TEST_CASE("eval of an exact rotation model") {
  TempDir dir;
  REQUIRE(run_cli({"gen-data", "--task", "rotation", "--n", "64", "--data", dir / "d.json"}).code == 0);
  Network net;
  Layer l;
  l.weights = ComplexMatrix(1, 1, phasor(kPi / 3));
  l.has_bias = false;
  net.layers = {l};
  std::ofstream(dir / "m.json") << serialize(net);
  const Result r = run_cli({"eval", "--model", dir / "m.json", "--data", dir / "d.json"});
  REQUIRE(r.code == 0);
  REQUIRE(r.out.rfind("loss=", 0) == 0);
  CHECK(std::stod(r.out.substr(5)) <= 1e-12);
}

TEST_CASE("training is byte-deterministic") {
  TempDir dir;
  REQUIRE(run_cli({"gen-data", "--task", "circle", "--n", "40", "--seed", "2", "--data", dir / "d.json"}).code == 0);
  for (const char* tag : {"a", "b"}) {
    const Result r = run_cli({"train", "--data", dir / "d.json", "--model", dir / (std::string(tag) + ".json"),
                              "--metrics", dir / (std::string(tag) + ".csv"), "--layers", "4,1", "--activation",
                              "crelu", "--output-map", "abs", "--epochs", "5", "--seed", "8"});
    REQUIRE(r.code == 0);
  }
  CHECK(slurp(dir / "a.csv") == slurp(dir / "b.csv"));
  CHECK(slurp(dir / "a.json") == slurp(dir / "b.json"));
  CHECK(slurp(dir / "a.csv").find("\n5,") != std::string::npos);
}

TEST_CASE("config file values yield to flags") {
  TempDir dir;
  std::ofstream(dir / "cfg.json") << R"({"task": "xor", "n": 10, "seed": 4})";
  REQUIRE(run_cli({"gen-data", "--config", dir / "cfg.json", "--data", dir / "x.json"}).code == 0);
  CHECK(dataset_from_json(slurp(dir / "x.json")).task == Task::Xor);
  REQUIRE(run_cli({"gen-data", "--config", dir / "cfg.json", "--task", "rotation", "--data", dir / "r.json"}).code ==
          0);
  const Dataset r = dataset_from_json(slurp(dir / "r.json"));
  CHECK(r.task == Task::Rotation);
  CHECK(r.size() == 10);
  CHECK(r == gen(Task::Rotation, 10, 4));
}

TEST_CASE("mvn training through the cli") {
  TempDir dir;
  REQUIRE(run_cli({"gen-data", "--task", "arcs", "--n", "20", "--seed", "1", "--data", dir / "a.json"}).code == 0);
  const Result r = run_cli({"train", "--algo", "mvn", "--data", dir / "a.json", "--model", dir / "m.json",
                            "--metrics", dir / "m.csv", "--epochs", "200"});
  REQUIRE(r.code == 0);
  const std::string csv = slurp(dir / "m.csv");
  const auto last = csv.rfind('\n', csv.size() - 2);
  CHECK(csv.substr(last + 1).find(",1,") != std::string::npos);
}

TEST_CASE("exit codes") {
  TempDir dir;
  CHECK(run_cli({}).code == 2);
  CHECK(run_cli({"fly"}).code == 2);
  CHECK(run_cli({"train", "--epochs", "many"}).code == 2);
  CHECK(run_cli({"gen-data", "--task", "spiral", "--data", dir / "s.json"}).code == 2);
  const Result usage = run_cli({"gradcheck", "--layers", "0"});
  CHECK(usage.code == 2);
  CHECK(usage.err.find('\n') == usage.err.size() - 1);

  CHECK(run_cli({"eval", "--model", dir / "missing.json", "--data", dir / "missing.json"}).code == 3);
  std::ofstream(dir / "bad.json") << "{\"mode\":";
  REQUIRE(run_cli({"gen-data", "--task", "xor", "--data", dir / "x.json"}).code == 0);
  const Result parse = run_cli({"eval", "--model", dir / "bad.json", "--data", dir / "x.json"});
  CHECK(parse.code == 3);
  CHECK(parse.err.find("serialize") != std::string::npos);
  const Result shape = run_cli({"train", "--data", dir / "x.json", "--model", dir / "m.json", "--layers", "3"});
  CHECK(shape.code == 3);
  REQUIRE(run_cli({"gen-data", "--task", "rotation", "--n", "8", "--data", dir / "r.json"}).code == 0);
  NetworkSpec spec;
  spec.inputs = 2;
  spec.widths = {1};
  std::ofstream(dir / "two.json") << serialize(make_network(spec));
  CHECK(run_cli({"eval", "--model", dir / "two.json", "--data", dir / "r.json"}).code == 3);

  // Log loss on a zero output is a numeric failure.
  Network zero;
  Layer l;
  l.weights = ComplexMatrix(1, 1);
  l.has_bias = false;
  zero.layers = {l};
  std::ofstream(dir / "zero.json") << serialize(zero);
  const Result numeric = run_cli({"eval", "--model", dir / "zero.json", "--data", dir / "r.json", "--loss", "log"});
  CHECK(numeric.code == 4);
  CHECK(numeric.err.find("losses") != std::string::npos);
}

TEST_CASE("training targets") {
  const Dataset xor_data = gen(Task::Xor, 4, 0);
  NetworkSpec spec;
  spec.inputs = 1;
  spec.widths = {2};
  spec.output_map = OutputMap::SoftmaxAvg;
  const Network soft = make_network(spec);
  const auto t = cli::training_targets(soft, LossKind::Quadratic, xor_data);
  CHECK(t[1] == ComplexVector{0.0, 1.0});
  spec.widths = {1};
  spec.output_map = OutputMap::CastLabels;
  const auto c = cli::training_targets(make_network(spec), LossKind::Quadratic, xor_data);
  CHECK(c[1] == ComplexVector{{1.0, 1.0}});
  spec.output_map = OutputMap::SqDiff;
  CHECK(cli::training_targets(make_network(spec), LossKind::Quadratic, xor_data) == xor_data.targets);
}
