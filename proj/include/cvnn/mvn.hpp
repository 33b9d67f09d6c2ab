#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "cvnn/complex.hpp"
#include "cvnn/network.hpp"

namespace cvnn {

/// Error-correction learning settings. `learning_rates[l][m]` scales the
/// correction of neuron m in layer l; empty means 1 everywhere.
struct MVNConfig {
  std::vector<std::vector<double>> learning_rates;
  double error_threshold = 1e-3;
  std::size_t max_epochs = 200;
  // With k sectors, an output already in its target's sector has zero
  // error; 0 means plain continuous error.
  int sectors = 0;
};

/// w_nm += C_m / (N_in + 1) * e_m * conj(x_n) for every neuron m, with the
/// bias input 1 appended to `inputs`. With `is_input_layer` the inputs
/// enter unconjugated. Neurons whose error is exactly 0 are untouched.
Layer mvn_update_layer(const Layer& layer, std::span<const Complex> inputs, std::span<const Complex> errors,
                       std::span<const double> rates, bool is_input_layer = false);

/// Spreads errors of layer l back to layer l-1:
/// e_j = 1/(N_{l-1} + 1) * sum_k e_k / w_kj, skipping |w_kj| < 1e-9.
ComplexVector mvn_hidden_errors(const Layer& layer, std::span<const Complex> errors);

struct MVNResult {
  Network net;
  std::size_t epochs_used = 0;
  std::vector<double> layer_errors;  // mean |e| per layer in the last epoch
};

/// Per-sample error-correction training. Terminates once every layer's
/// mean error magnitude is below the threshold, or after max_epochs.
/// Throws InvalidArgument if a layer is not MVN-activated.
MVNResult mvn_train(Network net, std::span<const ComplexVector> inputs, std::span<const ComplexVector> targets,
                    const MVNConfig& config,
                    const std::function<void(std::size_t, const Network&)>& on_epoch = {});

/// Sector index j of arg(z) in [0, 2pi) split into k equal sectors.
int mvn_sector(Complex z, int k);
/// Bisector exp(i 2pi (j + 1/2) / k) of sector j, the usual continuous target.
Complex mvn_sector_target(int j, int k);

}  // namespace cvnn
