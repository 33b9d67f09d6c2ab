#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "cvnn/complex.hpp"
#include "cvnn/losses.hpp"
#include "cvnn/network.hpp"

namespace cvnn {

/// How network outputs reach the loss.
enum class Head {
  None,            // loss on the raw complex outputs
  Abs,             // real heads from OutputMap, compared as y + 0i
  SqDiff,
  SoftmaxAbs,
  SoftmaxAvg,
  SplitSoftmax,    // softmax(Re o) + i softmax(Im o), feeds the ACE loss
};

struct Objective {
  LossKind loss = LossKind::Quadratic;
  Head head = Head::None;
};

/// Objective implied by a network's output map and a loss kind. ACE
/// always uses the split softmax head; CastLabels trains on raw outputs.
Objective make_objective(const Network& net, LossKind loss);

/// Outputs after the head, as the complex vector the loss consumes.
ComplexVector apply_head(Head head, std::span<const Complex> output);

double objective_value(const Objective& obj, std::span<const Complex> output, std::span<const Complex> target);

/// dE/do_k of the composed head and loss; dE/dobar_k is its conjugate.
ComplexVector objective_partials(const Objective& obj, std::span<const Complex> output,
                                 std::span<const Complex> target);

struct BatchNormGrad {
  Vec2 beta;
  SymMatrix2 gamma;
};

/// Per-layer steepest-ascent directions 2 dL/dwbar, laid out like the
/// weights, plus real gradients of batch-norm affine parameters.
struct GradientSet {
  std::vector<ComplexMatrix> weights;
  std::vector<std::vector<BatchNormGrad>> batchnorm;

  static GradientSet zeros_like(const Network& net);
  GradientSet& operator+=(const GradientSet& other);
  GradientSet& operator*=(double s);
};

enum class BackwardPath {
  Full,             // both Wirtinger terms of every activation
  HolomorphicOnly,  // drops the dX/dVbar terms
};

/// Reverse accumulation of (dE/dX, dE/dXbar) through the cached forward
/// pass. Throws NonDifferentiableError if any layer uses MVN discrete.
GradientSet backward(const Network& net, const ForwardCache& cache, std::span<const Complex> target,
                     const Objective& obj, BackwardPath path = BackwardPath::Full);
GradientSet backward(const Network& net, const ForwardCache& cache, std::span<const Complex> target,
                     LossKind loss, BackwardPath path = BackwardPath::Full);

/// w <- w - eta g. Throws ShapeError if g does not mirror the network.
Network sgd_step(const Network& net, const GradientSet& g, double eta);

struct BatchResult {
  double loss = 0.0;  // mean over samples
  GradientSet gradient;  // mean over samples
};

BatchResult batch_gradient(const Network& net, std::span<const ComplexVector> inputs,
                           std::span<const ComplexVector> targets, const Objective& obj);

double mean_objective(const Network& net, std::span<const ComplexVector> inputs,
                      std::span<const ComplexVector> targets, const Objective& obj);

/// Recomputes batch statistics of every batch-norm unit from `inputs`
/// and folds them into the moving averages, layer by layer.
void refresh_batchnorm(Network& net, std::span<const ComplexVector> inputs);

enum class GradCheckStatus { Pass, Fail, Inconclusive };

struct GradCheckReport {
  GradCheckStatus status = GradCheckStatus::Inconclusive;
  double max_rel_error = 0.0;
  double tolerance = 0.0;
  bool loose = false;  // network has batch-norm units
  int resamples = 0;
};

using SampleDrawer = std::function<std::pair<ComplexVector, ComplexVector>()>;

/// Compares backward() against central differences on every parameter.
/// Relative error is |a - f| / max(|a|, |f|, 1e-4, 1e-3 G) with G the
/// largest analytic gradient entry. If a cached
/// pre-activation (or the loss input) lies within 1000 h of a kink, pole
/// or singular point, scaled by the layer input size, a fresh (x, d) is drawn
/// from `resample` (up to 10 times) before giving up as Inconclusive.
GradCheckReport grad_check(const Network& net, std::span<const Complex> x, std::span<const Complex> d,
                           LossKind loss, double h = kDefaultStep, double tol = 1e-5,
                           const SampleDrawer& resample = {});

struct TrainConfig {
  double eta = 0.1;
  std::size_t epochs = 100;
  std::size_t batch_size = 32;
  std::uint64_t seed = 0;
  LossKind loss = LossKind::Quadratic;
};

/// Mini-batch SGD over a seeded shuffle. `on_epoch(epoch, net)` runs
/// after each epoch (1-based).
Network train_sgd(Network net, std::span<const ComplexVector> inputs, std::span<const ComplexVector> targets,
                  const TrainConfig& config,
                  const std::function<void(std::size_t, const Network&)>& on_epoch = {});

}  // namespace cvnn
