#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cvnn/activations.hpp"
#include "cvnn/batchnorm.hpp"
#include "cvnn/complex.hpp"
#include "cvnn/init.hpp"

namespace cvnn {

enum class NetworkMode { Split, FullyComplex };

/// Dense complex layer. `weights` is width x (inputs + has_bias); when
/// present, the last column multiplies a constant input of 1. A non-empty
/// `batchnorm` holds one whitening unit per neuron, applied between the
/// linear map and the activation.
struct Layer {
  ComplexMatrix weights;
  Activation activation;
  bool has_bias = true;
  std::vector<BatchNormState> batchnorm;

  std::size_t width() const noexcept { return weights.rows(); }
  std::size_t inputs() const noexcept { return weights.cols() - (has_bias ? 1 : 0); }
  bool operator==(const Layer&) const = default;
};

struct Network {
  std::vector<Layer> layers;
  NetworkMode mode = NetworkMode::Split;
  std::optional<OutputMap> output_map;

  std::size_t input_width() const { return layers.front().inputs(); }
  std::size_t output_width() const { return layers.back().width(); }
  bool operator==(const Network&) const = default;
};

/// Checks layer chaining, finite weights, BN sizes and the mode rule.
/// Throws ShapeError or InvalidArgument.
void validate(const Network& net);

struct LayerCache {
  ComplexVector linear;  // W [x; 1]
  ComplexVector pre;     // V: linear, or its batch-normalised image
  ComplexVector post;    // X = sigma(V)
};

struct ForwardCache {
  ComplexVector input;
  std::vector<LayerCache> layers;

  const ComplexVector& output() const { return layers.back().post; }
};

LayerCache layer_forward(const Layer& layer, std::span<const Complex> x);
ForwardCache forward(const Network& net, std::span<const Complex> x);
ComplexVector predict(const Network& net, std::span<const Complex> x);

struct NetworkSpec {
  std::size_t inputs = 1;
  std::vector<std::size_t> widths;  // hidden..output
  Activation hidden = Activation::complex_tanh();
  Activation output = Activation::identity();
  NetworkMode mode = NetworkMode::Split;
  std::optional<OutputMap> output_map;
  InitScheme init = InitScheme::RectUniform;
  bool bias = true;
  bool batchnorm = false;  // on hidden layers
  std::uint64_t seed = 0;
};

/// Builds and initialises a network. Layer l draws from seed ^ l; bias
/// columns start at zero.
Network make_network(const NetworkSpec& spec);

std::string to_string(NetworkMode m);
NetworkMode parse_mode(std::string_view text);

/// Model file text (JSON). Doubles are written in shortest round-trip
/// form so `deserialize(serialize(n)) == n` bit for bit.
std::string serialize(const Network& net);
/// Throws ParseError naming the byte offset or JSON path at fault.
Network deserialize(std::string_view text);

}  // namespace cvnn
