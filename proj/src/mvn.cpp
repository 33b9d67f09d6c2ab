#include "cvnn/mvn.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "cvnn/errors.hpp"

namespace cvnn {

namespace {

constexpr double kTinyWeight = 1e-9;

double rate_for(const MVNConfig& config, std::size_t l, std::size_t m) {
  if (l < config.learning_rates.size() && m < config.learning_rates[l].size()) {
    return config.learning_rates[l][m];
  }
  return 1.0;
}

}  // namespace

Layer mvn_update_layer(const Layer& layer, std::span<const Complex> inputs, std::span<const Complex> errors,
                       std::span<const double> rates, bool is_input_layer) {
  if (inputs.size() != layer.inputs() || errors.size() != layer.width() ||
      (!rates.empty() && rates.size() != layer.width())) {
    throw ShapeError("mvn-learning", "update operands do not match a layer of " + std::to_string(layer.width()) +
                                         "x" + std::to_string(layer.inputs()));
  }
  Layer out = layer;
  const double denom = static_cast<double>(layer.inputs() + 1);
  for (std::size_t m = 0; m < layer.width(); ++m) {
    if (errors[m] == Complex{}) {
      continue;
    }
    const double c = rates.empty() ? 1.0 : rates[m];
    const Complex step = c / denom * errors[m];
    auto row = out.weights.row(m);
    for (std::size_t n = 0; n < inputs.size(); ++n) {
      row[n] += step * (is_input_layer ? inputs[n] : std::conj(inputs[n]));
    }
    if (layer.has_bias) {
      row[inputs.size()] += step;
    }
  }
  return out;
}

ComplexVector mvn_hidden_errors(const Layer& layer, std::span<const Complex> errors) {
  if (errors.size() != layer.width()) {
    throw ShapeError("mvn-learning", "error vector does not match layer width");
  }
  const std::size_t n_prev = layer.inputs();
  const double scale = 1.0 / static_cast<double>(n_prev + 1);
  ComplexVector out(n_prev);
  for (std::size_t j = 0; j < n_prev; ++j) {
    Complex sum{};
    for (std::size_t k = 0; k < layer.width(); ++k) {
      const Complex w = layer.weights(k, j);
      if (modulus(w) >= kTinyWeight) {
        sum += errors[k] / w;
      }
    }
    out[j] = scale * sum;
  }
  return out;
}

MVNResult mvn_train(Network net, std::span<const ComplexVector> inputs, std::span<const ComplexVector> targets,
                    const MVNConfig& config, const std::function<void(std::size_t, const Network&)>& on_epoch) {
  for (const Layer& layer : net.layers) {
    if (!is_mvn(layer.activation)) {
      throw InvalidArgument("mvn-learning", "layer activation " + to_string(layer.activation) + " is not an MVN");
    }
  }
  if (inputs.size() != targets.size()) {
    throw ShapeError("mvn-learning", "inputs and targets differ in length");
  }
  if (config.sectors == 1 || config.sectors < 0) {
    throw InvalidArgument("mvn-learning", "sector count must be 0 or at least 2");
  }
  if (!(config.error_threshold > 0.0)) {
    throw InvalidArgument("mvn-learning", "error threshold must be positive");
  }
  const std::size_t depth = net.layers.size();
  MVNResult result;
  result.layer_errors.assign(depth, 0.0);

  for (std::size_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
    std::vector<double> error_sum(depth, 0.0);
    std::vector<std::size_t> error_count(depth, 0);
    for (std::size_t s = 0; s < inputs.size(); ++s) {
      const ForwardCache cache = forward(net, inputs[s]);
      const ComplexVector& out = cache.output();
      if (targets[s].size() != out.size()) {
        throw ShapeError("mvn-learning", "target width differs from output width");
      }
      std::vector<ComplexVector> errors(depth);
      errors[depth - 1].resize(out.size());
      for (std::size_t k = 0; k < out.size(); ++k) {
        const bool settled =
            config.sectors >= 2 && mvn_sector(out[k], config.sectors) == mvn_sector(targets[s][k], config.sectors);
        errors[depth - 1][k] = settled ? Complex{} : targets[s][k] - out[k];
      }
      for (std::size_t l = depth - 1; l > 0; --l) {
        errors[l - 1] = mvn_hidden_errors(net.layers[l], errors[l]);
      }
      for (std::size_t l = 0; l < depth; ++l) {
        for (std::size_t m = 0; m < errors[l].size(); ++m) {
          error_sum[l] += modulus(errors[l][m]);
          // no phase at a zero weighted sum: skip this neuron for the sample
          if (cache.layers[l].pre[m] == Complex{}) {
            errors[l][m] = {};
          }
        }
        error_count[l] += errors[l].size();
      }
      // update first to last, feeding each layer the refreshed outputs
      ComplexVector x = inputs[s];
      for (std::size_t l = 0; l < depth; ++l) {
        std::vector<double> rates(net.layers[l].width());
        for (std::size_t m = 0; m < rates.size(); ++m) {
          rates[m] = rate_for(config, l, m);
        }
        net.layers[l] = mvn_update_layer(net.layers[l], x, errors[l], rates);
        x = layer_forward(net.layers[l], x).post;
      }
    }
    bool converged = true;
    for (std::size_t l = 0; l < depth; ++l) {
      result.layer_errors[l] = error_count[l] ? error_sum[l] / static_cast<double>(error_count[l]) : 0.0;
      converged = converged && result.layer_errors[l] < config.error_threshold;
    }
    result.epochs_used = epoch;
    if (on_epoch) {
      on_epoch(epoch, net);
    }
    if (converged) {
      break;
    }
  }
  result.net = std::move(net);
  return result;
}

int mvn_sector(Complex z, int k) {
  double t = phase(z);
  if (t < 0.0) {
    t += 2.0 * kPi;
  }
  // the slack keeps computed roots of unity on the sector they open
  return std::clamp(static_cast<int>(std::floor(k * t / (2.0 * kPi) + 1e-12)), 0, k - 1);
}

Complex mvn_sector_target(int j, int k) { return phasor(2.0 * kPi * (j + 0.5) / k); }

}  // namespace cvnn
