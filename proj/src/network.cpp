#include "cvnn/network.hpp"

#include <string>

#include "cvnn/errors.hpp"

namespace cvnn {

void validate(const Network& net) {
  if (net.layers.empty()) {
    throw ShapeError("network", "network has no layers");
  }
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    const Layer& layer = net.layers[l];
    const std::string where = "layer " + std::to_string(l);
    if (layer.width() < 1 || layer.weights.cols() < (layer.has_bias ? 2u : 1u)) {
      throw ShapeError("network", where + " has an empty weight matrix");
    }
    if (l > 0 && layer.inputs() != net.layers[l - 1].width()) {
      throw ShapeError("network", where + " expects " + std::to_string(layer.inputs()) + " inputs but layer " +
                                      std::to_string(l - 1) + " produces " +
                                      std::to_string(net.layers[l - 1].width()));
    }
    for (Complex w : layer.weights.data()) {
      if (!is_finite(w)) {
        throw InvalidArgument("network", where + " has a non-finite weight");
      }
    }
    if (!layer.batchnorm.empty() && layer.batchnorm.size() != layer.width()) {
      throw ShapeError("network", where + " batch-norm count differs from layer width");
    }
    const bool hidden = l + 1 < net.layers.size();
    if (net.mode == NetworkMode::FullyComplex && hidden && !is_holomorphic(layer.activation)) {
      throw InvalidArgument("network", where + ": fully-complex mode requires holomorphic hidden activations, got " +
                                           to_string(layer.activation));
    }
  }
}

LayerCache layer_forward(const Layer& layer, std::span<const Complex> x) {
  if (x.size() != layer.inputs()) {
    throw ShapeError("network", "layer expects " + std::to_string(layer.inputs()) + " inputs, got " +
                                    std::to_string(x.size()));
  }
  LayerCache c;
  c.linear.resize(layer.width());
  for (std::size_t n = 0; n < layer.width(); ++n) {
    const auto row = layer.weights.row(n);
    Complex sum{};
    for (std::size_t m = 0; m < x.size(); ++m) {
      sum += row[m] * x[m];
    }
    if (layer.has_bias) {
      sum += row[x.size()];
    }
    c.linear[n] = sum;
  }
  c.pre = c.linear;
  if (!layer.batchnorm.empty()) {
    for (std::size_t n = 0; n < layer.width(); ++n) {
      c.pre[n] = bn_forward_infer(layer.batchnorm[n], std::span<const Complex>(&c.linear[n], 1)).front();
    }
  }
  c.post.resize(layer.width());
  for (std::size_t n = 0; n < layer.width(); ++n) {
    c.post[n] = apply_activation(layer.activation, c.pre[n]);
  }
  return c;
}

ForwardCache forward(const Network& net, std::span<const Complex> x) {
  if (net.layers.empty()) {
    throw ShapeError("network", "network has no layers");
  }
  ForwardCache cache;
  cache.input.assign(x.begin(), x.end());
  cache.layers.reserve(net.layers.size());
  std::span<const Complex> current = cache.input;
  for (const Layer& layer : net.layers) {
    cache.layers.push_back(layer_forward(layer, current));
    current = cache.layers.back().post;
  }
  return cache;
}

ComplexVector predict(const Network& net, std::span<const Complex> x) { return forward(net, x).output(); }

Network make_network(const NetworkSpec& spec) {
  if (spec.inputs < 1 || spec.widths.empty()) {
    throw InvalidArgument("network", "need at least one input and one layer");
  }
  Network net;
  net.mode = spec.mode;
  net.output_map = spec.output_map;
  std::size_t fan_in = spec.inputs;
  for (std::size_t l = 0; l < spec.widths.size(); ++l) {
    const std::size_t width = spec.widths[l];
    if (width < 1) {
      throw InvalidArgument("network", "layer widths must be >= 1");
    }
    const bool last = l + 1 == spec.widths.size();
    Layer layer;
    layer.has_bias = spec.bias;
    layer.activation = last ? spec.output : spec.hidden;
    const InitSpec init{spec.init, fan_in, width, spec.seed ^ static_cast<std::uint64_t>(l)};
    layer.weights = init_weights(init, width, fan_in + (spec.bias ? 1 : 0));
    if (spec.bias) {
      for (std::size_t n = 0; n < width; ++n) {
        layer.weights(n, fan_in) = 0.0;
      }
    }
    if (spec.batchnorm && !last) {
      layer.batchnorm.assign(width, BatchNormState{});
    }
    net.layers.push_back(std::move(layer));
    fan_in = width;
  }
  validate(net);
  return net;
}

std::string to_string(NetworkMode m) { return m == NetworkMode::Split ? "split" : "fully_complex"; }

NetworkMode parse_mode(std::string_view text) {
  if (text == "split") return NetworkMode::Split;
  if (text == "fully_complex") return NetworkMode::FullyComplex;
  throw InvalidArgument("network", "unknown network mode '" + std::string(text) + "'");
}

}  // namespace cvnn
