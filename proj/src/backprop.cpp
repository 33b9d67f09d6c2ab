#include "cvnn/backprop.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "cvnn/errors.hpp"
#include "cvnn/init.hpp"

namespace cvnn {

namespace {

constexpr double kRelFloor = 1e-4;
constexpr double kScaleFraction = 1e-3;
constexpr int kMaxResamples = 10;
constexpr double kKinkSteps = 1000.0;
constexpr double kLooseTolerance = 1e-2;

// Real gradient (dE/dx, dE/dv) for a real-valued E from its dE/do.
Vec2 real_gradient(Complex d_dz) { return {2.0 * d_dz.real(), -2.0 * d_dz.imag()}; }
// dE/do from the real gradient.
Complex from_real_gradient(double gx, double gv) { return 0.5 * Complex{gx, -gv}; }

// s (g - <s, g>): softmax Jacobian-transpose product.
std::vector<double> softmax_backward(std::span<const double> s, std::span<const double> g) {
  const double dot = std::inner_product(s.begin(), s.end(), g.begin(), 0.0);
  std::vector<double> out(s.size());
  for (std::size_t k = 0; k < s.size(); ++k) {
    out[k] = s[k] * (g[k] - dot);
  }
  return out;
}

std::vector<double> parts(std::span<const Complex> v, bool imag) {
  std::vector<double> out(v.size());
  std::transform(v.begin(), v.end(), out.begin(), [imag](Complex z) { return imag ? z.imag() : z.real(); });
  return out;
}

OutputMap head_map(Head head) {
  switch (head) {
    case Head::Abs: return OutputMap::Abs;
    case Head::SqDiff: return OutputMap::SqDiff;
    case Head::SoftmaxAbs: return OutputMap::SoftmaxAbs;
    default: return OutputMap::SoftmaxAvg;
  }
}

void check_differentiable(const Network& net) {
  for (const Layer& layer : net.layers) {
    if (!is_differentiable(layer.activation)) {
      throw NonDifferentiableError("backprop", "activation " + to_string(layer.activation) +
                                                   " is unsupported for gradient training");
    }
  }
}

void check_mirrors(const Network& net, const GradientSet& g) {
  if (g.weights.size() != net.layers.size() || g.batchnorm.size() != net.layers.size()) {
    throw ShapeError("backprop", "gradient set does not match network depth");
  }
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    const ComplexMatrix& w = net.layers[l].weights;
    if (g.weights[l].rows() != w.rows() || g.weights[l].cols() != w.cols() ||
        g.batchnorm[l].size() != net.layers[l].batchnorm.size()) {
      throw ShapeError("backprop", "gradient shape differs from layer " + std::to_string(l));
    }
  }
}

}  // namespace

Objective make_objective(const Network& net, LossKind loss) {
  Objective obj{loss, Head::None};
  const auto map = net.output_map;
  if (loss == LossKind::AverageCrossEntropy) {
    if (map && *map != OutputMap::CastLabels) {
      throw InvalidArgument("backprop", "ace loss applies its own split softmax; remove output map " +
                                            to_string(*map));
    }
    obj.head = Head::SplitSoftmax;
    return obj;
  }
  if (!map || *map == OutputMap::CastLabels) {
    return obj;
  }
  switch (*map) {
    case OutputMap::Abs: obj.head = Head::Abs; break;
    case OutputMap::SqDiff: obj.head = Head::SqDiff; break;
    case OutputMap::SoftmaxAbs: obj.head = Head::SoftmaxAbs; break;
    case OutputMap::SoftmaxAvg: obj.head = Head::SoftmaxAvg; break;
    case OutputMap::CastLabels: break;
  }
  return obj;
}

ComplexVector apply_head(Head head, std::span<const Complex> output) {
  switch (head) {
    case Head::None:
      return {output.begin(), output.end()};
    case Head::SplitSoftmax: {
      const auto p = softmax(parts(output, false));
      const auto q = softmax(parts(output, true));
      ComplexVector out(output.size());
      for (std::size_t k = 0; k < out.size(); ++k) {
        out[k] = {p[k], q[k]};
      }
      return out;
    }
    default: {
      const auto y = output_map(head_map(head), output);
      return {y.begin(), y.end()};
    }
  }
}

double objective_value(const Objective& obj, std::span<const Complex> output, std::span<const Complex> target) {
  return loss(obj.loss, apply_head(obj.head, output), target);
}

ComplexVector objective_partials(const Objective& obj, std::span<const Complex> output,
                                 std::span<const Complex> target) {
  const ComplexVector mapped = apply_head(obj.head, output);
  const auto pairs = loss_partials(obj.loss, mapped, target);
  const std::size_t n = output.size();
  ComplexVector out(n);
  if (obj.head == Head::None) {
    for (std::size_t k = 0; k < n; ++k) {
      out[k] = pairs[k].d_dz;
    }
    return out;
  }
  if (obj.head == Head::SplitSoftmax) {
    std::vector<double> gp(n), gq(n), p(n), q(n);
    for (std::size_t k = 0; k < n; ++k) {
      const Vec2 g = real_gradient(pairs[k].d_dz);
      gp[k] = g.re;
      gq[k] = g.im;
      p[k] = mapped[k].real();
      q[k] = mapped[k].imag();
    }
    const auto gx = softmax_backward(p, gp);
    const auto gv = softmax_backward(q, gq);
    for (std::size_t k = 0; k < n; ++k) {
      out[k] = from_real_gradient(gx[k], gv[k]);
    }
    return out;
  }
  // Real heads: y_k real, so dE/dy_k (as a real variable) = 2 Re(dE/dy_k).
  std::vector<double> gy(n);
  for (std::size_t k = 0; k < n; ++k) {
    gy[k] = 2.0 * pairs[k].d_dz.real();
  }
  switch (obj.head) {
    case Head::SqDiff:
      for (std::size_t k = 0; k < n; ++k) {
        const double t = output[k].real() - output[k].imag();
        out[k] = from_real_gradient(2.0 * t * gy[k], -2.0 * t * gy[k]);
      }
      return out;
    case Head::SoftmaxAvg: {
      std::vector<double> s(n);
      for (std::size_t k = 0; k < n; ++k) {
        s[k] = mapped[k].real();
      }
      const auto ga = softmax_backward(s, gy);
      for (std::size_t k = 0; k < n; ++k) {
        out[k] = from_real_gradient(0.5 * ga[k], 0.5 * ga[k]);
      }
      return out;
    }
    case Head::Abs:
    case Head::SoftmaxAbs: {
      std::vector<double> ga = gy;
      if (obj.head == Head::SoftmaxAbs) {
        std::vector<double> s(n);
        for (std::size_t k = 0; k < n; ++k) {
          s[k] = mapped[k].real();
        }
        ga = softmax_backward(s, gy);
      }
      for (std::size_t k = 0; k < n; ++k) {
        const double r = modulus(output[k]);
        out[k] = r == 0.0 ? Complex{} : from_real_gradient(ga[k] * output[k].real() / r, ga[k] * output[k].imag() / r);
      }
      return out;
    }
    default:
      return out;
  }
}

GradientSet GradientSet::zeros_like(const Network& net) {
  GradientSet g;
  for (const Layer& layer : net.layers) {
    g.weights.emplace_back(layer.weights.rows(), layer.weights.cols());
    g.batchnorm.emplace_back(layer.batchnorm.size());
  }
  return g;
}

GradientSet& GradientSet::operator+=(const GradientSet& other) {
  for (std::size_t l = 0; l < weights.size(); ++l) {
    auto dst = weights[l].data();
    auto src = other.weights[l].data();
    for (std::size_t i = 0; i < dst.size(); ++i) {
      dst[i] += src[i];
    }
    for (std::size_t n = 0; n < batchnorm[l].size(); ++n) {
      BatchNormGrad& a = batchnorm[l][n];
      const BatchNormGrad& b = other.batchnorm[l][n];
      a.beta.re += b.beta.re;
      a.beta.im += b.beta.im;
      a.gamma.rr += b.gamma.rr;
      a.gamma.ri += b.gamma.ri;
      a.gamma.ii += b.gamma.ii;
    }
  }
  return *this;
}

GradientSet& GradientSet::operator*=(double s) {
  for (std::size_t l = 0; l < weights.size(); ++l) {
    for (Complex& v : weights[l].data()) {
      v *= s;
    }
    for (BatchNormGrad& b : batchnorm[l]) {
      b.beta = {b.beta.re * s, b.beta.im * s};
      b.gamma = {b.gamma.rr * s, b.gamma.ri * s, b.gamma.ii * s};
    }
  }
  return *this;
}

GradientSet backward(const Network& net, const ForwardCache& cache, std::span<const Complex> target,
                     const Objective& obj, BackwardPath path) {
  check_differentiable(net);
  if (cache.layers.size() != net.layers.size()) {
    throw ShapeError("backprop", "forward cache does not match network depth");
  }
  GradientSet g = GradientSet::zeros_like(net);
  // delta holds dE/dX of the current layer; dE/dXbar is its conjugate.
  ComplexVector delta = objective_partials(obj, cache.output(), target);

  for (std::size_t l = net.layers.size(); l-- > 0;) {
    const Layer& layer = net.layers[l];
    const LayerCache& lc = cache.layers[l];
    const std::span<const Complex> x_prev = l == 0 ? std::span<const Complex>(cache.input)
                                                   : std::span<const Complex>(cache.layers[l - 1].post);
    ComplexVector delta_linear(layer.width());
    for (std::size_t n = 0; n < layer.width(); ++n) {
      const WirtingerPair act = activation_partials(layer.activation, lc.pre[n]);
      // dE/dV = dE/dX dX/dV + dE/dXbar dXbar/dV, with dXbar/dV = conj(dX/dVbar)
      Complex dv = delta[n] * act.d_dz;
      if (path == BackwardPath::Full) {
        dv += std::conj(delta[n]) * std::conj(act.d_dzbar);
      }
      if (!layer.batchnorm.empty()) {
        const BatchNormState& bn = layer.batchnorm[n];
        const Matrix2 whiten = inv_sqrt_2x2_spd(bn.moving_cov, bn.epsilon);
        const Vec2 xhat = whiten * Vec2{lc.linear[n].real() - bn.moving_mean.re,
                                        lc.linear[n].imag() - bn.moving_mean.im};
        const Vec2 gy = real_gradient(dv);
        g.batchnorm[l][n].beta = gy;
        g.batchnorm[l][n].gamma = {gy.re * xhat.re, gy.re * xhat.im + gy.im * xhat.re, gy.im * xhat.im};
        const WirtingerPair affine = wirtinger_of_linear(bn_inference_map(bn).linear);
        dv = dv * affine.d_dz + std::conj(dv) * std::conj(affine.d_dzbar);
      }
      delta_linear[n] = dv;
    }
    // V is holomorphic in w and x: dE/dw_nm = dE/dV_n x_m, gradient = 2 conj(dE/dw_nm)
    ComplexMatrix& gw = g.weights[l];
    for (std::size_t n = 0; n < layer.width(); ++n) {
      for (std::size_t m = 0; m < x_prev.size(); ++m) {
        gw(n, m) = 2.0 * std::conj(delta_linear[n] * x_prev[m]);
      }
      if (layer.has_bias) {
        gw(n, x_prev.size()) = 2.0 * std::conj(delta_linear[n]);
      }
    }
    if (l > 0) {
      ComplexVector next(x_prev.size());
      for (std::size_t m = 0; m < x_prev.size(); ++m) {
        Complex sum{};
        for (std::size_t n = 0; n < layer.width(); ++n) {
          sum += delta_linear[n] * layer.weights(n, m);
        }
        next[m] = sum;
      }
      delta = std::move(next);
    }
  }
  return g;
}

GradientSet backward(const Network& net, const ForwardCache& cache, std::span<const Complex> target,
                     LossKind loss, BackwardPath path) {
  return backward(net, cache, target, make_objective(net, loss), path);
}

Network sgd_step(const Network& net, const GradientSet& g, double eta) {
  check_mirrors(net, g);
  Network out = net;
  for (std::size_t l = 0; l < out.layers.size(); ++l) {
    auto w = out.layers[l].weights.data();
    auto d = g.weights[l].data();
    for (std::size_t i = 0; i < w.size(); ++i) {
      w[i] -= eta * d[i];
    }
    for (std::size_t n = 0; n < out.layers[l].batchnorm.size(); ++n) {
      BatchNormState& s = out.layers[l].batchnorm[n];
      const BatchNormGrad& b = g.batchnorm[l][n];
      s.beta.re -= eta * b.beta.re;
      s.beta.im -= eta * b.beta.im;
      s.gamma.rr -= eta * b.gamma.rr;
      s.gamma.ri -= eta * b.gamma.ri;
      s.gamma.ii -= eta * b.gamma.ii;
    }
  }
  return out;
}

BatchResult batch_gradient(const Network& net, std::span<const ComplexVector> inputs,
                           std::span<const ComplexVector> targets, const Objective& obj) {
  if (inputs.size() != targets.size() || inputs.empty()) {
    throw ShapeError("backprop", "batch inputs and targets must be non-empty and equally long");
  }
  BatchResult r{0.0, GradientSet::zeros_like(net)};
  for (std::size_t s = 0; s < inputs.size(); ++s) {
    const ForwardCache cache = forward(net, inputs[s]);
    r.loss += objective_value(obj, cache.output(), targets[s]);
    r.gradient += backward(net, cache, targets[s], obj);
  }
  const double inv = 1.0 / static_cast<double>(inputs.size());
  r.loss *= inv;
  r.gradient *= inv;
  return r;
}

double mean_objective(const Network& net, std::span<const ComplexVector> inputs,
                      std::span<const ComplexVector> targets, const Objective& obj) {
  double sum = 0.0;
  for (std::size_t s = 0; s < inputs.size(); ++s) {
    sum += objective_value(obj, predict(net, inputs[s]), targets[s]);
  }
  return inputs.empty() ? 0.0 : sum / static_cast<double>(inputs.size());
}

void refresh_batchnorm(Network& net, std::span<const ComplexVector> inputs) {
  if (inputs.size() < 2) {
    return;
  }
  std::vector<ComplexVector> current(inputs.begin(), inputs.end());
  for (Layer& layer : net.layers) {
    std::vector<LayerCache> caches;
    caches.reserve(current.size());
    for (const ComplexVector& x : current) {
      caches.push_back(layer_forward(layer, x));
    }
    if (!layer.batchnorm.empty()) {
      for (std::size_t n = 0; n < layer.width(); ++n) {
        ComplexVector column(caches.size());
        for (std::size_t s = 0; s < caches.size(); ++s) {
          column[s] = caches[s].linear[n];
        }
        layer.batchnorm[n] = bn_update_moving(layer.batchnorm[n], batch_statistics(column));
      }
      for (std::size_t s = 0; s < current.size(); ++s) {
        caches[s] = layer_forward(layer, current[s]);
      }
    }
    for (std::size_t s = 0; s < current.size(); ++s) {
      current[s] = std::move(caches[s].post);
    }
  }
}

namespace {

bool near_kink(const Network& net, const ForwardCache& cache, const Objective& obj, std::span<const Complex> d,
               double h) {
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    const auto& x_prev = l == 0 ? cache.input : cache.layers[l - 1].post;
    double scale = 1.0;
    for (Complex v : x_prev) {
      scale = std::max(scale, modulus(v));
    }
    // Poles and z/|z| singularities bend like 1/distance, so central
    // differences need far more room than the step itself.
    const double margin = kKinkSteps * h * scale;
    for (Complex v : cache.layers[l].pre) {
      if (kink_distance(net.layers[l].activation, v) < margin) {
        return true;
      }
    }
  }
  const ComplexVector mapped = apply_head(obj.head, cache.output());
  return loss_kink_distance(obj.loss, mapped, d) < kKinkSteps * h;
}

// Entries far below the largest gradient are only resolved absolutely by
// central differences, so they are measured on a fraction of that scale.
double rel_error(Complex a, Complex f, double largest) {
  return std::abs(a - f) / std::max({std::abs(a), std::abs(f), kRelFloor, kScaleFraction * largest});
}

double max_error_against_fd(const Network& net, std::span<const Complex> x, std::span<const Complex> d,
                            const Objective& obj, double h) {
  const GradientSet analytic = backward(net, forward(net, x), d, obj);
  double largest = 0.0;
  for (const ComplexMatrix& g : analytic.weights) {
    for (Complex v : g.data()) {
      largest = std::max(largest, modulus(v));
    }
  }
  for (const auto& layer : analytic.batchnorm) {
    for (const BatchNormGrad& b : layer) {
      largest = std::max({largest, std::abs(b.beta.re), std::abs(b.beta.im), std::abs(b.gamma.rr),
                          std::abs(b.gamma.ri), std::abs(b.gamma.ii)});
    }
  }
  const auto rel_error = [largest](Complex a, Complex f) { return cvnn::rel_error(a, f, largest); };
  Network probe = net;
  auto value = [&]() { return objective_value(obj, predict(probe, x), d); };
  auto real_fd = [&](double& param) {
    const double saved = param;
    param = saved + h;
    const double up = value();
    param = saved - h;
    const double down = value();
    param = saved;
    return (up - down) / (2.0 * h);
  };
  double worst = 0.0;
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    auto w = probe.layers[l].weights.data();
    auto a = analytic.weights[l].data();
    for (std::size_t i = 0; i < w.size(); ++i) {
      const Complex saved = w[i];
      double re = saved.real();
      double im = saved.imag();
      auto sync = [&]() { w[i] = {re, im}; };
      // dL/dRe(w) + i dL/dIm(w) == 2 dL/dwbar
      const double d_re = [&] {
        const double s = re;
        re = s + h; sync(); const double up = value();
        re = s - h; sync(); const double down = value();
        re = s; sync();
        return (up - down) / (2.0 * h);
      }();
      const double d_im = [&] {
        const double s = im;
        im = s + h; sync(); const double up = value();
        im = s - h; sync(); const double down = value();
        im = s; sync();
        return (up - down) / (2.0 * h);
      }();
      w[i] = saved;
      worst = std::max(worst, rel_error(a[i], {d_re, d_im}));
    }
    for (std::size_t n = 0; n < probe.layers[l].batchnorm.size(); ++n) {
      BatchNormState& s = probe.layers[l].batchnorm[n];
      const BatchNormGrad& b = analytic.batchnorm[l][n];
      worst = std::max(worst, rel_error(b.beta.re, real_fd(s.beta.re)));
      worst = std::max(worst, rel_error(b.beta.im, real_fd(s.beta.im)));
      worst = std::max(worst, rel_error(b.gamma.rr, real_fd(s.gamma.rr)));
      worst = std::max(worst, rel_error(b.gamma.ri, real_fd(s.gamma.ri)));
      worst = std::max(worst, rel_error(b.gamma.ii, real_fd(s.gamma.ii)));
    }
  }
  return worst;
}

}  // namespace

GradCheckReport grad_check(const Network& net, std::span<const Complex> x, std::span<const Complex> d,
                           LossKind loss, double h, double tol, const SampleDrawer& resample) {
  check_differentiable(net);
  const Objective obj = make_objective(net, loss);
  GradCheckReport report;
  report.loose = std::any_of(net.layers.begin(), net.layers.end(),
                             [](const Layer& layer) { return !layer.batchnorm.empty(); });
  report.tolerance = report.loose ? std::max(tol, kLooseTolerance) : tol;

  ComplexVector xs(x.begin(), x.end());
  ComplexVector ds(d.begin(), d.end());
  for (int attempt = 0; attempt <= kMaxResamples; ++attempt) {
    if (attempt > 0) {
      if (!resample) {
        break;
      }
      std::tie(xs, ds) = resample();
      report.resamples = attempt;
    }
    try {
      if (near_kink(net, forward(net, xs), obj, ds, h)) {
        continue;
      }
      report.max_rel_error = max_error_against_fd(net, xs, ds, obj, h);
    } catch (const DomainError&) {
      continue;  // a probe stepped onto a zero of the logarithmic loss
    }
    report.status = report.max_rel_error <= report.tolerance ? GradCheckStatus::Pass : GradCheckStatus::Fail;
    return report;
  }
  report.status = GradCheckStatus::Inconclusive;
  return report;
}

Network train_sgd(Network net, std::span<const ComplexVector> inputs, std::span<const ComplexVector> targets,
                  const TrainConfig& config, const std::function<void(std::size_t, const Network&)>& on_epoch) {
  if (inputs.size() != targets.size() || inputs.empty()) {
    throw ShapeError("backprop", "training inputs and targets must be non-empty and equally long");
  }
  if (!(config.eta > 0.0) || config.batch_size < 1) {
    throw InvalidArgument("backprop", "learning rate and batch size must be positive");
  }
  const Objective obj = make_objective(net, config.loss);
  const bool has_bn = std::any_of(net.layers.begin(), net.layers.end(),
                                  [](const Layer& layer) { return !layer.batchnorm.empty(); });
  RngStream rng(config.seed);
  std::vector<std::size_t> order(inputs.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<ComplexVector> bx, by;
  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    for (std::size_t i = order.size(); i > 1; --i) {
      std::swap(order[i - 1], order[rng.index(i)]);
    }
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      bx.clear();
      by.clear();
      for (std::size_t i = start; i < end; ++i) {
        bx.push_back(inputs[order[i]]);
        by.push_back(targets[order[i]]);
      }
      if (has_bn) {
        refresh_batchnorm(net, bx);
      }
      net = sgd_step(net, batch_gradient(net, bx, by, obj).gradient, config.eta);
    }
    if (on_epoch) {
      on_epoch(epoch, net);
    }
  }
  return net;
}

}  // namespace cvnn
