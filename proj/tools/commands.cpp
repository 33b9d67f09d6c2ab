#include "commands.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "cvnn/backprop.hpp"
#include "cvnn/errors.hpp"
#include "cvnn/losses.hpp"
#include "cvnn/mvn.hpp"
#include "json.hpp"

namespace cvnn::cli {

namespace {

struct RunConfig {
  // data
  std::string task = "xor";
  std::size_t n = 256;
  double theta = kPi / 3.0;
  double r1 = 1.0;
  double r2 = 2.0;
  double noise = 0.0;
  double margin = 0.2;
  // model
  std::string layers = "1";
  std::size_t inputs = 4;
  std::string activation;
  std::string output_activation;
  std::string output_map;
  std::string mode = "split";
  std::string init = "rect";
  bool no_bias = false;
  bool batchnorm = false;
  // training
  std::string loss = "quadratic";
  std::string algo = "sgd";
  double eta = 0.1;
  std::size_t epochs = 100;
  std::size_t batch = 32;
  std::uint64_t seed = 0;
  double threshold = 1e-3;
  bool timing = false;
  // gradcheck
  double h = kDefaultStep;
  double tol = 1e-5;
  // files
  std::string model;
  std::string data;
  std::string metrics;
  std::string config;
};

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class FileError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string fmt(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, end);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw FileError("cannot read '" + path + "'");
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out || !(out << text)) {
    throw FileError("cannot write '" + path + "'");
  }
}

std::vector<std::size_t> parse_widths(const std::string& text) {
  std::vector<std::size_t> widths;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t v = 0;
    auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
    if (ec != std::errc() || ptr != item.data() + item.size() || v < 1) {
      throw UsageError("--layers expects comma-separated widths >= 1, got '" + text + "'");
    }
    widths.push_back(v);
  }
  if (widths.empty()) {
    throw UsageError("--layers must name at least one layer");
  }
  return widths;
}

// Config-file entries become leading command-line tokens; with
// take-last semantics any explicit flag overrides them.
std::vector<std::string> config_tokens(const std::string& path) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw UsageError("config '" + path + "' is not valid JSON (byte " + std::to_string(e.byte) + ")");
  }
  if (!doc.is_object()) {
    throw UsageError("config '" + path + "' must be a JSON object");
  }
  std::vector<std::string> tokens;
  for (const auto& [key, value] : doc.items()) {
    const std::string flag = "--" + key;
    if (value.is_boolean()) {
      if (value.get<bool>()) {
        tokens.push_back(flag);
      }
    } else if (value.is_string()) {
      tokens.push_back(flag);
      tokens.push_back(value.get<std::string>());
    } else if (value.is_number()) {
      tokens.push_back(flag);
      tokens.push_back(value.dump());
    } else {
      throw UsageError("config key '" + key + "' must be a string, number or boolean");
    }
  }
  return tokens;
}

std::size_t class_count(const Dataset& data) {
  const int top = data.labels.empty() ? 1 : *std::max_element(data.labels.begin(), data.labels.end());
  return static_cast<std::size_t>(std::max(top + 1, 2));
}

bool mvn_output(const Network& net) { return is_mvn(net.layers.back().activation); }

int mvn_classes(const Network& net, const Dataset& data) {
  const Activation& a = net.layers.back().activation;
  return a.type == ActivationType::MVNDiscrete ? a.sectors : static_cast<int>(class_count(data));
}

bool one_hot_targets(const Network& net, LossKind loss) {
  return loss == LossKind::AverageCrossEntropy ||
         (net.output_map && (*net.output_map == OutputMap::SoftmaxAbs || *net.output_map == OutputMap::SoftmaxAvg));
}

std::size_t argmax(std::span<const double> v) {
  return static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
}

NetworkSpec network_spec(const RunConfig& cfg, std::size_t inputs) {
  NetworkSpec spec;
  spec.inputs = inputs;
  spec.widths = parse_widths(cfg.layers);
  const bool mvn = cfg.algo == "mvn";
  spec.hidden = parse_activation(cfg.activation.empty() ? (mvn ? "mvn" : "ctanh") : cfg.activation);
  spec.output = parse_activation(cfg.output_activation.empty() ? (mvn ? "mvn" : "identity") : cfg.output_activation);
  spec.mode = parse_mode(cfg.mode);
  if (!cfg.output_map.empty()) {
    spec.output_map = parse_output_map(cfg.output_map);
  }
  spec.init = parse_init_scheme(cfg.init);
  spec.bias = !cfg.no_bias;
  spec.batchnorm = cfg.batchnorm;
  spec.seed = cfg.seed;
  return spec;
}

Dataset load_dataset(const RunConfig& cfg) {
  if (cfg.data.empty()) {
    throw UsageError("--data is required");
  }
  return dataset_from_json(read_file(cfg.data));
}

void check_widths(const Network& net, const Dataset& data, const std::vector<ComplexVector>& targets) {
  if (data.inputs.front().size() != net.input_width()) {
    throw ShapeError("cli", "dataset has " + std::to_string(data.inputs.front().size()) +
                                " inputs but the model expects " + std::to_string(net.input_width()));
  }
  if (targets.front().size() != net.output_width()) {
    throw ShapeError("cli", "targets have " + std::to_string(targets.front().size()) +
                                " entries but the model produces " + std::to_string(net.output_width()));
  }
}

double mvn_output_error(const Network& net, const std::vector<ComplexVector>& inputs,
                        const std::vector<ComplexVector>& targets) {
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t s = 0; s < inputs.size(); ++s) {
    const ComplexVector out = predict(net, inputs[s]);
    for (std::size_t k = 0; k < out.size(); ++k) {
      sum += modulus(targets[s][k] - out[k]);
      ++count;
    }
  }
  return count ? sum / static_cast<double>(count) : 0.0;
}

int cmd_gen_data(const RunConfig& cfg, std::ostream& out) {
  TaskParams params;
  params.theta = cfg.theta;
  params.r1 = cfg.r1;
  params.r2 = cfg.r2;
  params.radial_noise = cfg.noise;
  params.margin = cfg.margin;
  const Dataset data = gen(parse_task(cfg.task), cfg.n, cfg.seed, params);
  if (cfg.data.empty()) {
    throw UsageError("--data names the output file and is required");
  }
  write_file(cfg.data, dataset_to_json(data));
  out << "wrote " << data.size() << " samples to " << cfg.data << "\n";
  return kOk;
}

int cmd_train(const RunConfig& cfg, std::ostream& out) {
  if (cfg.model.empty()) {
    throw UsageError("--model names the output model file and is required");
  }
  const Dataset data = load_dataset(cfg);
  const LossKind loss = parse_loss(cfg.loss);
  Network net = make_network(network_spec(cfg, data.inputs.front().size()));
  const auto targets = training_targets(net, loss, data);
  check_widths(net, data, targets);

  std::ostringstream csv;
  csv << "epoch,loss,accuracy,wall_ms\n";
  const bool labelled = !data.labels.empty();
  const auto start = std::chrono::steady_clock::now();
  auto record = [&](double value, std::size_t epoch, const Network& current) {
    csv << epoch << ',' << fmt(value) << ',';
    if (labelled) {
      csv << fmt(accuracy(current, loss, data));
    }
    const auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - start);
    csv << ',' << (cfg.timing ? elapsed.count() : 0) << '\n';
  };

  if (cfg.algo == "sgd") {
    TrainConfig tc{cfg.eta, cfg.epochs, cfg.batch, cfg.seed, loss};
    const Objective obj = make_objective(net, loss);
    net = train_sgd(net, data.inputs, targets, tc, [&](std::size_t epoch, const Network& current) {
      record(mean_objective(current, data.inputs, targets, obj), epoch, current);
    });
  } else if (cfg.algo == "mvn") {
    MVNConfig mc;
    mc.error_threshold = cfg.threshold;
    mc.max_epochs = cfg.epochs;
    if (labelled) {
      mc.sectors = mvn_classes(net, data);
    }
    net = mvn_train(net, data.inputs, targets, mc, [&](std::size_t epoch, const Network& current) {
            record(mvn_output_error(current, data.inputs, targets), epoch, current);
          }).net;
  } else {
    throw UsageError("--algo must be sgd or mvn");
  }
  write_file(cfg.model, serialize(net));
  if (!cfg.metrics.empty()) {
    write_file(cfg.metrics, csv.str());
  } else {
    out << csv.str();
  }
  return kOk;
}

int cmd_eval(const RunConfig& cfg, std::ostream& out) {
  if (cfg.model.empty()) {
    throw UsageError("--model is required");
  }
  const Network net = deserialize(read_file(cfg.model));
  const Dataset data = load_dataset(cfg);
  const LossKind loss = parse_loss(cfg.loss);
  const auto targets = training_targets(net, loss, data);
  check_widths(net, data, targets);
  const double value = mvn_output(net) && cfg.algo == "mvn"
                           ? mvn_output_error(net, data.inputs, targets)
                           : mean_objective(net, data.inputs, targets, make_objective(net, loss));
  std::ostringstream line;
  line << "loss=" << fmt(value);
  if (!data.labels.empty()) {
    line << " accuracy=" << fmt(accuracy(net, loss, data));
  }
  out << line.str() << "\n";
  if (!cfg.metrics.empty()) {
    write_file(cfg.metrics, "loss,accuracy\n" + fmt(value) + "," +
                                (data.labels.empty() ? std::string() : fmt(accuracy(net, loss, data))) + "\n");
  }
  return kOk;
}

int cmd_gradcheck(const RunConfig& cfg, std::ostream& out) {
  const LossKind loss = parse_loss(cfg.loss);
  Network net = cfg.model.empty() ? make_network(network_spec(cfg, cfg.inputs)) : deserialize(read_file(cfg.model));
  RngStream rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);
  auto draw = [&]() {
    ComplexVector x(net.input_width());
    for (Complex& v : x) {
      v = {rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
    }
    ComplexVector d(net.output_width());
    if (loss == LossKind::AverageCrossEntropy) {
      d[rng.index(d.size())] = 1.0;
    } else {
      for (Complex& v : d) {
        v = {rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
      }
    }
    return std::pair{x, d};
  };
  const auto [x, d] = draw();
  const GradCheckReport report = grad_check(net, x, d, loss, cfg.h, cfg.tol, draw);
  switch (report.status) {
    case GradCheckStatus::Pass: out << "PASS"; break;
    case GradCheckStatus::Fail: out << "FAIL"; break;
    case GradCheckStatus::Inconclusive: out << "INCONCLUSIVE"; break;
  }
  out << " max_rel_err=" << fmt(report.max_rel_error) << " tol=" << fmt(report.tolerance);
  if (report.loose) {
    out << " loose";
  }
  out << "\n";
  return report.status == GradCheckStatus::Pass ? kOk : kNumeric;
}

void add_model_options(CLI::App* cmd, RunConfig& cfg) {
  cmd->add_option("--layers", cfg.layers, "Layer widths after the input, e.g. 8,8,1");
  cmd->add_option("--activation", cfg.activation, "Hidden activation, e.g. crelu, modrelu(b=-1.0)");
  cmd->add_option("--output-activation", cfg.output_activation, "Output layer activation");
  cmd->add_option("--output-map", cfg.output_map, "abs, sqdiff, softmax_abs, softmax_avg or cast_labels");
  cmd->add_option("--mode", cfg.mode, "split or fully_complex");
  cmd->add_option("--init", cfg.init, "polar or rect");
  cmd->add_flag("--no-bias", cfg.no_bias, "Omit bias weights");
  cmd->add_flag("--batchnorm", cfg.batchnorm, "Complex batch normalisation on hidden layers");
  cmd->add_option("--loss", cfg.loss, "quadratic, log or ace");
  cmd->add_option("--seed", cfg.seed, "Random seed");
}

}  // namespace

std::vector<ComplexVector> training_targets(const Network& net, LossKind loss, const Dataset& data) {
  if (data.labels.empty()) {
    return data.targets;
  }
  std::vector<ComplexVector> out;
  out.reserve(data.size());
  if (mvn_output(net)) {
    const int k = mvn_classes(net, data);
    const bool discrete = net.layers.back().activation.type == ActivationType::MVNDiscrete;
    for (int label : data.labels) {
      out.push_back({discrete ? phasor(2.0 * kPi * label / k) : mvn_sector_target(label, k)});
    }
    return out;
  }
  if (one_hot_targets(net, loss)) {
    for (int label : data.labels) {
      ComplexVector t(net.output_width());
      if (label < 0 || static_cast<std::size_t>(label) >= t.size()) {
        throw ShapeError("cli", "label " + std::to_string(label) + " exceeds output width");
      }
      t[static_cast<std::size_t>(label)] = 1.0;
      out.push_back(std::move(t));
    }
    return out;
  }
  if (net.output_map == OutputMap::CastLabels) {
    for (int label : data.labels) {
      const double c = label;
      out.push_back(cast_labels(std::span<const double>(&c, 1)));
    }
    return out;
  }
  return data.targets;
}

double accuracy(const Network& net, LossKind loss, const Dataset& data) {
  if (data.labels.empty()) {
    return 0.0;
  }
  std::size_t correct = 0;
  for (std::size_t s = 0; s < data.size(); ++s) {
    const ComplexVector o = predict(net, data.inputs[s]);
    int predicted = 0;
    if (mvn_output(net)) {
      predicted = mvn_sector(o.front(), mvn_classes(net, data));
    } else if (loss == LossKind::AverageCrossEntropy) {
      const ComplexVector p = apply_head(Head::SplitSoftmax, o);
      std::vector<double> avg(p.size());
      for (std::size_t k = 0; k < p.size(); ++k) {
        avg[k] = 0.5 * (p[k].real() + p[k].imag());
      }
      predicted = static_cast<int>(argmax(avg));
    } else if (one_hot_targets(net, loss)) {
      predicted = static_cast<int>(argmax(output_map(*net.output_map, o)));
    } else {
      const double y = net.output_map ? output_map(*net.output_map, o).front() : o.front().real();
      predicted = class_count(data) == 2 ? (y >= 0.5 ? 1 : 0) : static_cast<int>(std::lround(y));
    }
    correct += predicted == data.labels[s] ? 1 : 0;
  }
  return static_cast<double>(correct) / static_cast<double>(data.size());
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  CLI::App app{"Complex-valued neural network toolkit"};
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.require_subcommand(1);

  auto* gen_cmd = app.add_subcommand("gen-data", "Generate a synthetic dataset");
  gen_cmd->add_option("--task", cfg.task, "xor, rotation, circle or arcs");
  gen_cmd->add_option("--n", cfg.n, "Sample count");
  gen_cmd->add_option("--theta", cfg.theta, "Rotation angle (rad)");
  gen_cmd->add_option("--r1", cfg.r1, "Circle inner radius");
  gen_cmd->add_option("--r2", cfg.r2, "Circle outer radius");
  gen_cmd->add_option("--noise", cfg.noise, "Circle radial noise half-width");
  gen_cmd->add_option("--margin", cfg.margin, "Arcs angular margin");
  gen_cmd->add_option("--seed", cfg.seed, "Random seed");
  gen_cmd->add_option("--data", cfg.data, "Output dataset file");

  auto* train_cmd = app.add_subcommand("train", "Train a network");
  add_model_options(train_cmd, cfg);
  train_cmd->add_option("--algo", cfg.algo, "sgd or mvn");
  train_cmd->add_option("--eta", cfg.eta, "Learning rate");
  train_cmd->add_option("--epochs", cfg.epochs, "Epoch count (maximum for mvn)");
  train_cmd->add_option("--batch", cfg.batch, "Mini-batch size");
  train_cmd->add_option("--threshold", cfg.threshold, "MVN mean-error termination threshold");
  train_cmd->add_flag("--timing", cfg.timing, "Record wall-clock milliseconds in the metrics");
  train_cmd->add_option("--model", cfg.model, "Output model file");
  train_cmd->add_option("--data", cfg.data, "Training dataset file");
  train_cmd->add_option("--metrics", cfg.metrics, "Metrics CSV output (stdout if omitted)");

  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a trained model");
  eval_cmd->add_option("--model", cfg.model, "Model file");
  eval_cmd->add_option("--data", cfg.data, "Dataset file");
  eval_cmd->add_option("--loss", cfg.loss, "quadratic, log or ace");
  eval_cmd->add_option("--algo", cfg.algo, "mvn reports the mean output error instead of a loss");
  eval_cmd->add_option("--metrics", cfg.metrics, "Optional CSV output");

  auto* grad_cmd = app.add_subcommand("gradcheck", "Compare backprop against finite differences");
  grad_cmd->set_help_flag("--help", "Print this help message and exit");
  add_model_options(grad_cmd, cfg);
  grad_cmd->add_option("--inputs", cfg.inputs, "Input width of the generated network");
  grad_cmd->add_option("--model", cfg.model, "Check an existing model instead");
  grad_cmd->add_option("--h", cfg.h, "Finite-difference step");
  grad_cmd->add_option("--tol", cfg.tol, "Relative error tolerance");

  for (auto* cmd : {gen_cmd, train_cmd, eval_cmd, grad_cmd}) {
    cmd->add_option("--config", cfg.config, "JSON config; explicit flags take precedence");
  }

  try {
    std::vector<std::string> tokens;
    if (args.size() > 1) {
      tokens.push_back(args[1]);
    }
    for (std::size_t i = 2; i + 1 < args.size(); ++i) {
      if (args[i] == "--config") {
        const auto extra = config_tokens(args[i + 1]);
        tokens.insert(tokens.end(), extra.begin(), extra.end());
      }
    }
    if (args.size() > 2) {
      tokens.insert(tokens.end(), args.begin() + 2, args.end());
    }
    // CLI11 consumes the vector from the back.
    std::vector<std::string> reversed(tokens.rbegin(), tokens.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const FileError& e) {
    err << "usage error: " << e.what() << "\n";
    return kUsage;
  }

  try {
    if (gen_cmd->parsed()) return cmd_gen_data(cfg, out);
    if (train_cmd->parsed()) return cmd_train(cfg, out);
    if (eval_cmd->parsed()) return cmd_eval(cfg, out);
    if (grad_cmd->parsed()) return cmd_gradcheck(cfg, out);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const InvalidArgument& e) {
    err << "usage error: " << e.module() << ": " << e.what() << "\n";
    return kUsage;
  } catch (const FileError& e) {
    err << "data error: " << e.what() << "\n";
    return kData;
  } catch (const ShapeError& e) {
    err << "data error: " << e.module() << ": " << e.what() << "\n";
    return kData;
  } catch (const ParseError& e) {
    err << "data error: " << e.module() << ": " << e.what() << "\n";
    return kData;
  } catch (const Error& e) {
    err << "numeric error: " << e.module() << ": " << e.what() << "\n";
    return kNumeric;
  }
  return kUsage;
}

}  // namespace cvnn::cli
