#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cvnn/complex.hpp"

namespace cvnn {

/// Real nonlinearities available to the split (Type-A / Type-B) activations.
enum class RealFn { Sigmoid, Tanh, Relu, Identity };

enum class ActivationType {
  TypeA,          // f_re(x) + i f_im(y)
  TypeB,          // f_r(|z|) * exp(i f_phi(arg z))
  CReLU,          // Type-A ReLU
  ZReLU,          // z on the closed first quadrant, 0 elsewhere
  ModReLU,        // ReLU(|z| + b) z/|z|
  Cardioid,       // (1 + cos(arg z)) z / 2
  MVNDiscrete,    // nearest-below k-th root of unity
  MVNContinuous,  // z/|z|
  ComplexTanh,
  Identity,
};

/// A complex activation function together with its parameters.
/// Construct through the named factories; `to_string`/`parse_activation`
/// give the canonical text form used by model files and the CLI.
struct Activation {
  ActivationType type = ActivationType::Identity;
  RealFn first = RealFn::Identity;   // f_re or f_r
  RealFn second = RealFn::Identity;  // f_im or f_phi
  double radius = 0.0;               // ModReLU b
  int sectors = 0;                   // MVNDiscrete k

  static Activation identity() { return {}; }
  static Activation complex_tanh() { return {ActivationType::ComplexTanh}; }
  static Activation crelu() { return {ActivationType::CReLU}; }
  static Activation zrelu() { return {ActivationType::ZReLU}; }
  static Activation cardioid() { return {ActivationType::Cardioid}; }
  static Activation mvn_continuous() { return {ActivationType::MVNContinuous}; }
  static Activation modrelu(double b);
  static Activation mvn_discrete(int k);
  static Activation type_a(RealFn re, RealFn im) { return {ActivationType::TypeA, re, im}; }
  static Activation type_b(RealFn magnitude, RealFn phase) {
    return {ActivationType::TypeB, magnitude, phase};
  }

  bool operator==(const Activation&) const = default;
};

double apply_real(RealFn f, double x);
/// Derivative with f'(0) := 0 at the ReLU kink.
double real_derivative(RealFn f, double x);

Complex apply_activation(const Activation& a, Complex z);

/// Analytic (dX/dV, dX/dVbar). Throws NonDifferentiableError for MVNDiscrete.
WirtingerPair activation_partials(const Activation& a, Complex z);

/// True when dX/dVbar vanishes identically (ComplexTanh, Identity).
bool is_holomorphic(const Activation& a);
bool is_differentiable(const Activation& a);
bool is_mvn(const Activation& a);

/// Distance from z to the nearest point where `a` is not smooth (kinks,
/// branch cuts, poles). Infinity when there is none.
double kink_distance(const Activation& a, Complex z);

std::string to_string(const Activation& a);
std::string to_string(RealFn f);
/// Parses the canonical names, e.g. "crelu", "modrelu(b=-1.0)",
/// "type_b(tanh,identity)", "mvn(k=4)". Throws InvalidArgument.
Activation parse_activation(std::string_view text);

/// Output-layer mappings from complex outputs to the real domain.
enum class OutputMap { Abs, SqDiff, SoftmaxAbs, SoftmaxAvg, CastLabels };

/// Abs -> |z|, SqDiff -> (x - y)^2, SoftmaxAbs -> softmax(|z|),
/// SoftmaxAvg -> softmax((x + y)/2). CastLabels decodes outputs trained
/// against cast labels c + ic back to the real label (x + y)/2.
std::vector<double> output_map(OutputMap kind, std::span<const Complex> v);

/// Label casting c -> c + ic.
ComplexVector cast_labels(std::span<const double> labels);

std::vector<double> softmax(std::span<const double> x);

std::string to_string(OutputMap m);
OutputMap parse_output_map(std::string_view text);

}  // namespace cvnn
