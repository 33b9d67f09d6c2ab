#include <string>

#include "cvnn/errors.hpp"
#include "cvnn/network.hpp"
#include "json.hpp"

namespace cvnn {

namespace {

using nlohmann::json;

json vec2_json(Vec2 v) { return json::array({v.re, v.im}); }
json sym_json(const SymMatrix2& s) { return json::array({s.rr, s.ri, s.ii}); }

json bn_json(const BatchNormState& s) {
  return {{"moving_mean", vec2_json(s.moving_mean)},
          {"moving_cov", sym_json(s.moving_cov)},
          {"gamma", sym_json(s.gamma)},
          {"beta", vec2_json(s.beta)},
          {"alpha", s.alpha},
          {"epsilon", s.epsilon}};
}

// Reads a JSON document while tracking the path for error messages.
class Reader {
 public:
  Reader(const json& node, std::string path) : node_(node), path_(std::move(path)) {}

  Reader at(const std::string& key) const {
    if (!node_.is_object()) {
      fail("expected an object");
    }
    const auto it = node_.find(key);
    if (it == node_.end()) {
      throw ParseError(path_, "missing key '" + key + "'");
    }
    return {*it, path_ + "/" + key};
  }

  bool has(const std::string& key) const { return node_.is_object() && node_.contains(key); }

  Reader at(std::size_t i) const {
    if (!node_.is_array() || i >= node_.size()) {
      fail("array too short");
    }
    return {node_[i], path_ + "/" + std::to_string(i)};
  }

  std::size_t array_size() const {
    if (!node_.is_array()) {
      fail("expected an array");
    }
    return node_.size();
  }

  std::size_t array_size(std::size_t expected) const {
    const std::size_t n = array_size();
    if (n != expected) {
      fail("expected " + std::to_string(expected) + " entries, found " + std::to_string(n));
    }
    return n;
  }

  double number() const {
    if (!node_.is_number()) {
      fail("expected a number");
    }
    return node_.get<double>();
  }

  std::size_t count() const {
    if (!node_.is_number_unsigned()) {
      fail("expected a non-negative integer");
    }
    return node_.get<std::size_t>();
  }

  bool boolean() const {
    if (!node_.is_boolean()) {
      fail("expected a boolean");
    }
    return node_.get<bool>();
  }

  std::string string() const {
    if (!node_.is_string()) {
      fail("expected a string");
    }
    return node_.get<std::string>();
  }

  bool is_null() const { return node_.is_null(); }

  [[noreturn]] void fail(const std::string& what) const { throw ParseError(path_, what); }

 private:
  const json& node_;
  std::string path_;
};

Vec2 read_vec2(const Reader& r) {
  r.array_size(2);
  return {r.at(0).number(), r.at(1).number()};
}

SymMatrix2 read_sym(const Reader& r) {
  r.array_size(3);
  return {r.at(0).number(), r.at(1).number(), r.at(2).number()};
}

BatchNormState read_bn(const Reader& r) {
  BatchNormState s;
  s.moving_mean = read_vec2(r.at("moving_mean"));
  s.moving_cov = read_sym(r.at("moving_cov"));
  s.gamma = read_sym(r.at("gamma"));
  s.beta = read_vec2(r.at("beta"));
  s.alpha = r.at("alpha").number();
  s.epsilon = r.at("epsilon").number();
  return s;
}

Layer read_layer(const Reader& r) {
  Layer layer;
  try {
    layer.activation = parse_activation(r.at("activation").string());
  } catch (const InvalidArgument& e) {
    r.at("activation").fail(e.what());
  }
  const std::size_t rows = r.at("rows").count();
  const std::size_t cols = r.at("cols").count();
  layer.has_bias = r.at("has_bias").boolean();
  if (rows < 1 || cols < (layer.has_bias ? 2u : 1u)) {
    r.fail("layer shape " + std::to_string(rows) + "x" + std::to_string(cols) + " is empty");
  }
  layer.weights = ComplexMatrix(rows, cols);
  const Reader re = r.at("weights_re");
  const Reader im = r.at("weights_im");
  re.array_size(rows);
  im.array_size(rows);
  for (std::size_t i = 0; i < rows; ++i) {
    const Reader re_row = re.at(i);
    const Reader im_row = im.at(i);
    re_row.array_size(cols);
    im_row.array_size(cols);
    for (std::size_t j = 0; j < cols; ++j) {
      layer.weights(i, j) = {re_row.at(j).number(), im_row.at(j).number()};
    }
  }
  if (r.has("batchnorm")) {
    const Reader bn = r.at("batchnorm");
    const std::size_t n = bn.array_size();
    for (std::size_t i = 0; i < n; ++i) {
      layer.batchnorm.push_back(read_bn(bn.at(i)));
    }
  }
  return layer;
}

}  // namespace

std::string serialize(const Network& net) {
  json layers = json::array();
  for (const Layer& layer : net.layers) {
    json re = json::array();
    json im = json::array();
    for (std::size_t i = 0; i < layer.weights.rows(); ++i) {
      json re_row = json::array();
      json im_row = json::array();
      for (Complex w : layer.weights.row(i)) {
        re_row.push_back(w.real());
        im_row.push_back(w.imag());
      }
      re.push_back(std::move(re_row));
      im.push_back(std::move(im_row));
    }
    json entry = {{"activation", to_string(layer.activation)},
                  {"rows", layer.weights.rows()},
                  {"cols", layer.weights.cols()},
                  {"has_bias", layer.has_bias},
                  {"weights_re", std::move(re)},
                  {"weights_im", std::move(im)}};
    if (!layer.batchnorm.empty()) {
      json bn = json::array();
      for (const BatchNormState& s : layer.batchnorm) {
        bn.push_back(bn_json(s));
      }
      entry["batchnorm"] = std::move(bn);
    }
    layers.push_back(std::move(entry));
  }
  json doc = {{"mode", to_string(net.mode)},
              {"output_map", net.output_map ? json(to_string(*net.output_map)) : json(nullptr)},
              {"layers", std::move(layers)}};
  return doc.dump(1) + "\n";
}

Network deserialize(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw ParseError("byte " + std::to_string(e.byte), "malformed model file");
  }
  const Reader root(doc, "");
  Network net;
  try {
    net.mode = parse_mode(root.at("mode").string());
  } catch (const InvalidArgument& e) {
    root.at("mode").fail(e.what());
  }
  const Reader map = root.at("output_map");
  if (!map.is_null()) {
    try {
      net.output_map = parse_output_map(map.string());
    } catch (const InvalidArgument& e) {
      map.fail(e.what());
    }
  }
  const Reader layers = root.at("layers");
  const std::size_t n = layers.array_size();
  if (n == 0) {
    layers.fail("layer list is empty");
  }
  for (std::size_t i = 0; i < n; ++i) {
    net.layers.push_back(read_layer(layers.at(i)));
  }
  try {
    validate(net);
  } catch (const Error& e) {
    throw ParseError("/layers", e.what());
  }
  return net;
}

}  // namespace cvnn
