#include "cvnn/datasets.hpp"

#include <cmath>
#include <string>

#include "cvnn/errors.hpp"
#include "cvnn/init.hpp"
#include "cvnn/mvn.hpp"
#include "json.hpp"

namespace cvnn {

Dataset gen(Task task, std::size_t n, std::uint64_t seed, const TaskParams& params) {
  if (n < 1) {
    throw InvalidArgument("datasets", "dataset size must be >= 1");
  }
  Dataset data;
  data.task = task;
  RngStream rng(seed);
  switch (task) {
    case Task::Xor: {
      const ComplexVector points{{0.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}, {1.0, 1.0}};
      data.labels = {0, 1, 1, 0};
      for (std::size_t k = 0; k < points.size(); ++k) {
        data.inputs.push_back({points[k]});
        data.targets.push_back({Complex{static_cast<double>(data.labels[k]), 0.0}});
      }
      break;
    }
    case Task::Rotation: {
      const Complex rot = phasor(params.theta);
      for (std::size_t k = 0; k < n; ++k) {
        // sqrt of the radius draw gives uniform area density
        const Complex x = std::polar(std::sqrt(rng.uniform()), 2.0 * kPi * rng.uniform());
        data.inputs.push_back({x});
        data.targets.push_back({rot * x});
      }
      break;
    }
    case Task::Circle: {
      if (!(params.r1 < params.r2) || params.r1 < 0.0 || params.radial_noise < 0.0) {
        throw InvalidArgument("datasets", "circle task needs 0 <= r1 < r2 and non-negative noise");
      }
      for (std::size_t k = 0; k < n; ++k) {
        const int label = static_cast<int>(k % 2);
        const double radius = (label == 0 ? params.r1 : params.r2) + params.radial_noise * rng.uniform(-1.0, 1.0);
        data.inputs.push_back({std::polar(radius, 2.0 * kPi * rng.uniform())});
        data.labels.push_back(label);
        data.targets.push_back({Complex{static_cast<double>(label), 0.0}});
      }
      break;
    }
    case Task::Arcs: {
      if (!(params.margin >= 0.0 && params.margin < kPi / 2.0)) {
        throw InvalidArgument("datasets", "arc margin must lie in [0, pi/2)");
      }
      const double offset = 2.0 * kPi * rng.uniform();
      for (std::size_t k = 0; k < n; ++k) {
        const int label = static_cast<int>(k % 2);
        const double angle = offset + label * kPi + rng.uniform(params.margin, kPi - params.margin);
        data.inputs.push_back({phasor(angle)});
        data.labels.push_back(label);
        data.targets.push_back({mvn_sector_target(label, 2)});
      }
      break;
    }
  }
  return data;
}

std::string to_string(Task task) {
  switch (task) {
    case Task::Xor: return "xor";
    case Task::Rotation: return "rotation";
    case Task::Circle: return "circle";
    case Task::Arcs: return "arcs";
  }
  return "xor";
}

Task parse_task(std::string_view text) {
  for (Task t : {Task::Xor, Task::Rotation, Task::Circle, Task::Arcs}) {
    if (text == to_string(t)) {
      return t;
    }
  }
  throw InvalidArgument("datasets", "unknown task '" + std::string(text) + "'");
}

namespace {

using nlohmann::json;

json split(const std::vector<ComplexVector>& rows, bool imag) {
  json out = json::array();
  for (const ComplexVector& row : rows) {
    json r = json::array();
    for (Complex z : row) {
      r.push_back(imag ? z.imag() : z.real());
    }
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<ComplexVector> join(const json& doc, const std::string& key) {
  const std::string re_key = key + "_re";
  const std::string im_key = key + "_im";
  if (!doc.contains(re_key) || !doc.contains(im_key)) {
    throw ParseError("/", "missing " + re_key + " or " + im_key);
  }
  const json& re = doc[re_key];
  const json& im = doc[im_key];
  if (!re.is_array() || !im.is_array() || re.size() != im.size()) {
    throw ParseError("/" + re_key, "re/im arrays must have equal length");
  }
  std::vector<ComplexVector> out;
  for (std::size_t i = 0; i < re.size(); ++i) {
    const std::string path = "/" + re_key + "/" + std::to_string(i);
    if (!re[i].is_array() || !im[i].is_array() || re[i].size() != im[i].size()) {
      throw ParseError(path, "row re/im lengths differ");
    }
    ComplexVector row;
    for (std::size_t j = 0; j < re[i].size(); ++j) {
      if (!re[i][j].is_number() || !im[i][j].is_number()) {
        throw ParseError(path + "/" + std::to_string(j), "expected a number");
      }
      row.emplace_back(re[i][j].get<double>(), im[i][j].get<double>());
    }
    out.push_back(std::move(row));
  }
  return out;
}

}  // namespace

std::string dataset_to_json(const Dataset& data) {
  json doc = {{"task", to_string(data.task)},
              {"inputs_re", split(data.inputs, false)},
              {"inputs_im", split(data.inputs, true)},
              {"targets_re", split(data.targets, false)},
              {"targets_im", split(data.targets, true)}};
  if (!data.labels.empty()) {
    doc["labels"] = data.labels;
  }
  return doc.dump() + "\n";
}

Dataset dataset_from_json(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw ParseError("byte " + std::to_string(e.byte), "malformed dataset file");
  }
  if (!doc.is_object() || !doc.contains("task") || !doc["task"].is_string()) {
    throw ParseError("/task", "missing task name");
  }
  Dataset data;
  try {
    data.task = parse_task(doc["task"].get<std::string>());
  } catch (const InvalidArgument& e) {
    throw ParseError("/task", e.what());
  }
  data.inputs = join(doc, "inputs");
  data.targets = join(doc, "targets");
  if (data.inputs.size() != data.targets.size() || data.inputs.empty()) {
    throw ParseError("/", "inputs and targets must be non-empty and equally long");
  }
  if (doc.contains("labels")) {
    const json& labels = doc["labels"];
    if (!labels.is_array() || labels.size() != data.inputs.size()) {
      throw ParseError("/labels", "label count differs from sample count");
    }
    for (const json& v : labels) {
      if (!v.is_number_integer()) {
        throw ParseError("/labels", "labels must be integers");
      }
      data.labels.push_back(v.get<int>());
    }
  }
  return data;
}

}  // namespace cvnn
