#include "cvnn/activations.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <string>

#include "cvnn/errors.hpp"

namespace cvnn {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
const Complex kI{0.0, 1.0};

double sigmoid(double x) {
  if (x >= 0.0) {
    return 1.0 / (1.0 + std::exp(-x));
  }
  const double e = std::exp(x);
  return e / (1.0 + e);
}

// f(|z|) exp(i g(arg z)) and its Wirtinger partials. Valid for z != 0.
Complex type_b_value(RealFn magnitude, RealFn phase_fn, Complex z) {
  return apply_real(magnitude, modulus(z)) * phasor(apply_real(phase_fn, phase(z)));
}

WirtingerPair type_b_partials(RealFn magnitude, RealFn phase_fn, Complex z) {
  const double r = modulus(z);
  const double theta = phase(z);
  const double g = apply_real(magnitude, r);
  const double dg = real_derivative(magnitude, r);
  const double dpsi = real_derivative(phase_fn, theta);
  const Complex rot = phasor(apply_real(phase_fn, theta));
  // dr/dz = zbar/(2r), dr/dzbar = z/(2r), darg/dz = 1/(2iz), darg/dzbar = i/(2 zbar)
  const Complex d_dz = rot * (dg * std::conj(z) / (2.0 * r) + g * dpsi / (2.0 * z));
  const Complex d_dzbar = rot * (dg * z / (2.0 * r) - g * dpsi / (2.0 * std::conj(z)));
  return {d_dz, d_dzbar};
}

double real_kink(RealFn f, double x) { return f == RealFn::Relu ? std::abs(x) : kInf; }

RealFn parse_real_fn(std::string_view s) {
  if (s == "sigmoid") return RealFn::Sigmoid;
  if (s == "tanh") return RealFn::Tanh;
  if (s == "relu") return RealFn::Relu;
  if (s == "identity") return RealFn::Identity;
  throw InvalidArgument("activations", "unknown real function '" + std::string(s) + "'");
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
  while (!s.empty() && s.back() == ' ') s.remove_suffix(1);
  return s;
}

std::string format_double(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  std::string out(buf, end);
  if (out.find_first_of(".eEn") == std::string::npos) {
    out += ".0";
  }
  return out;
}

double parse_double(std::string_view s, std::string_view context) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) {
    throw InvalidArgument("activations", "bad number in '" + std::string(context) + "'");
  }
  return v;
}

}  // namespace

Activation Activation::modrelu(double b) {
  if (!std::isfinite(b)) {
    throw InvalidArgument("activations", "modrelu radius must be finite");
  }
  Activation a{ActivationType::ModReLU};
  a.radius = b;
  return a;
}

Activation Activation::mvn_discrete(int k) {
  if (k < 2) {
    throw InvalidArgument("activations", "mvn sector count must be >= 2");
  }
  Activation a{ActivationType::MVNDiscrete};
  a.sectors = k;
  return a;
}

double apply_real(RealFn f, double x) {
  switch (f) {
    case RealFn::Sigmoid: return sigmoid(x);
    case RealFn::Tanh: return std::tanh(x);
    case RealFn::Relu: return x > 0.0 ? x : 0.0;
    case RealFn::Identity: return x;
  }
  return x;
}

double real_derivative(RealFn f, double x) {
  switch (f) {
    case RealFn::Sigmoid: {
      const double s = sigmoid(x);
      return s * (1.0 - s);
    }
    case RealFn::Tanh: {
      const double t = std::tanh(x);
      return 1.0 - t * t;
    }
    case RealFn::Relu: return x > 0.0 ? 1.0 : 0.0;
    case RealFn::Identity: return 1.0;
  }
  return 1.0;
}

Complex apply_activation(const Activation& a, Complex z) {
  switch (a.type) {
    case ActivationType::Identity:
      return z;
    case ActivationType::ComplexTanh:
      return std::tanh(z);
    case ActivationType::TypeA:
      return {apply_real(a.first, z.real()), apply_real(a.second, z.imag())};
    case ActivationType::CReLU:
      return {apply_real(RealFn::Relu, z.real()), apply_real(RealFn::Relu, z.imag())};
    case ActivationType::ZReLU:
      return (z.real() >= 0.0 && z.imag() >= 0.0) ? z : Complex{};
    case ActivationType::TypeB:
      return type_b_value(a.first, a.second, z);
    case ActivationType::ModReLU: {
      const double r = modulus(z);
      if (r == 0.0 || r + a.radius <= 0.0) {
        return {};
      }
      return (r + a.radius) * (z / r);
    }
    case ActivationType::Cardioid: {
      const double r = modulus(z);
      if (r == 0.0) {
        return {};
      }
      return 0.5 * (1.0 + z.real() / r) * z;
    }
    case ActivationType::MVNContinuous: {
      const double r = modulus(z);
      return r == 0.0 ? Complex{} : z / r;
    }
    case ActivationType::MVNDiscrete: {
      double t = phase(z);
      if (t < 0.0) {
        t += 2.0 * kPi;
      }
      const int k = a.sectors;
      int j = static_cast<int>(std::floor(k * t / (2.0 * kPi) + 1e-12));
      j = std::clamp(j, 0, k - 1);
      return phasor(2.0 * kPi * j / k);
    }
  }
  return z;
}

WirtingerPair activation_partials(const Activation& a, Complex z) {
  switch (a.type) {
    case ActivationType::Identity:
      return {1.0, 0.0};
    case ActivationType::ComplexTanh: {
      const Complex t = std::tanh(z);
      return {1.0 - t * t, 0.0};
    }
    case ActivationType::TypeA:
    case ActivationType::CReLU: {
      const RealFn re = a.type == ActivationType::CReLU ? RealFn::Relu : a.first;
      const RealFn im = a.type == ActivationType::CReLU ? RealFn::Relu : a.second;
      const double dre = real_derivative(re, z.real());
      const double dim = real_derivative(im, z.imag());
      return {0.5 * (dre + dim), 0.5 * (dre - dim)};
    }
    case ActivationType::ZReLU:
      if (z.real() > 0.0 && z.imag() > 0.0) {
        return {1.0, 0.0};
      }
      return {0.0, 0.0};
    case ActivationType::TypeB:
      if (modulus(z) == 0.0) {
        // f ~ f_r'(0) z near the origin when the phase passes through.
        if (a.second == RealFn::Identity && apply_real(a.first, 0.0) == 0.0) {
          return {real_derivative(a.first, 0.0), 0.0};
        }
        return {0.0, 0.0};
      }
      return type_b_partials(a.first, a.second, z);
    case ActivationType::ModReLU: {
      const double r = modulus(z);
      if (r == 0.0 || r + a.radius <= 0.0) {
        return {0.0, 0.0};
      }
      return {1.0 + a.radius / (2.0 * r), -a.radius * z * z / (2.0 * r * r * r)};
    }
    case ActivationType::Cardioid: {
      const double r = modulus(z);
      if (r == 0.0) {
        return {0.5, 0.0};
      }
      // f = z/2 + z c/2 with c = Re(z)/|z| = (z + zbar)/(2r)
      const double c = z.real() / r;
      const double r3 = r * r * r;
      const Complex dc_dz = 1.0 / (2.0 * r) - z.real() * std::conj(z) / (2.0 * r3);
      const Complex dc_dzbar = 1.0 / (2.0 * r) - z.real() * z / (2.0 * r3);
      return {0.5 * (1.0 + c) + 0.5 * z * dc_dz, 0.5 * z * dc_dzbar};
    }
    case ActivationType::MVNContinuous: {
      // f = z (z zbar)^{-1/2}
      const double r = modulus(z);
      if (r == 0.0) {
        return {0.0, 0.0};
      }
      return {1.0 / (2.0 * r), -z * z / (2.0 * r * r * r)};
    }
    case ActivationType::MVNDiscrete:
      throw NonDifferentiableError("activations", "mvn discrete activation has no derivative");
  }
  return {1.0, 0.0};
}

bool is_holomorphic(const Activation& a) {
  return a.type == ActivationType::ComplexTanh || a.type == ActivationType::Identity;
}

bool is_differentiable(const Activation& a) { return a.type != ActivationType::MVNDiscrete; }

bool is_mvn(const Activation& a) {
  return a.type == ActivationType::MVNDiscrete || a.type == ActivationType::MVNContinuous;
}

double kink_distance(const Activation& a, Complex z) {
  const double x = z.real();
  const double y = z.imag();
  const double r = modulus(z);
  switch (a.type) {
    case ActivationType::Identity:
      return kInf;
    case ActivationType::ComplexTanh: {
      // poles at i(pi/2 + k pi)
      const double k = std::round((y - kPi / 2.0) / kPi);
      return std::hypot(x, y - (kPi / 2.0 + k * kPi));
    }
    case ActivationType::TypeA:
      return std::min(real_kink(a.first, x), real_kink(a.second, y));
    case ActivationType::CReLU:
      return std::min(std::abs(x), std::abs(y));
    case ActivationType::ZReLU:
      if (x >= 0.0 && y >= 0.0) return std::min(x, y);
      if (x >= 0.0) return -y;
      if (y >= 0.0) return -x;
      return r;
    case ActivationType::TypeB: {
      double d = r;
      if (a.second != RealFn::Identity && x < 0.0) {
        d = std::min(d, std::abs(y));  // branch cut of arg
      }
      return d;
    }
    case ActivationType::ModReLU:
      // with b < 0 the origin lies inside the dead disc
      return a.radius < 0.0 ? std::abs(r + a.radius) : std::min(r, std::abs(r + a.radius));
    case ActivationType::Cardioid:
    case ActivationType::MVNContinuous:
      return r;
    case ActivationType::MVNDiscrete:
      return 0.0;
  }
  return kInf;
}

std::string to_string(RealFn f) {
  switch (f) {
    case RealFn::Sigmoid: return "sigmoid";
    case RealFn::Tanh: return "tanh";
    case RealFn::Relu: return "relu";
    case RealFn::Identity: return "identity";
  }
  return "identity";
}

std::string to_string(const Activation& a) {
  switch (a.type) {
    case ActivationType::Identity: return "identity";
    case ActivationType::ComplexTanh: return "ctanh";
    case ActivationType::CReLU: return "crelu";
    case ActivationType::ZReLU: return "zrelu";
    case ActivationType::Cardioid: return "cardioid";
    case ActivationType::MVNContinuous: return "mvn";
    case ActivationType::MVNDiscrete: return "mvn(k=" + std::to_string(a.sectors) + ")";
    case ActivationType::ModReLU: return "modrelu(b=" + format_double(a.radius) + ")";
    case ActivationType::TypeA: return "type_a(" + to_string(a.first) + "," + to_string(a.second) + ")";
    case ActivationType::TypeB: return "type_b(" + to_string(a.first) + "," + to_string(a.second) + ")";
  }
  return "identity";
}

Activation parse_activation(std::string_view text) {
  text = trim(text);
  std::string_view name = text;
  std::string_view args;
  if (const auto open = text.find('('); open != std::string_view::npos) {
    if (text.back() != ')') {
      throw InvalidArgument("activations", "unbalanced parentheses in '" + std::string(text) + "'");
    }
    name = trim(text.substr(0, open));
    args = trim(text.substr(open + 1, text.size() - open - 2));
  }
  auto keyed = [&](std::string_view key) {
    std::string_view v = args;
    if (v.starts_with(key)) {
      v.remove_prefix(key.size());
      v = trim(v);
      if (!v.empty() && v.front() == '=') {
        v.remove_prefix(1);
      }
    }
    return trim(v);
  };
  auto pair = [&]() {
    const auto comma = args.find(',');
    if (comma == std::string_view::npos) {
      throw InvalidArgument("activations", "expected two real functions in '" + std::string(text) + "'");
    }
    return std::pair{parse_real_fn(trim(args.substr(0, comma))), parse_real_fn(trim(args.substr(comma + 1)))};
  };

  if (name == "identity" && args.empty()) return Activation::identity();
  if ((name == "ctanh" || name == "tanh") && args.empty()) return Activation::complex_tanh();
  if (name == "crelu" && args.empty()) return Activation::crelu();
  if (name == "zrelu" && args.empty()) return Activation::zrelu();
  if (name == "cardioid" && args.empty()) return Activation::cardioid();
  if (name == "mvn" && args.empty()) return Activation::mvn_continuous();
  if (name == "mvn") {
    const double k = parse_double(keyed("k"), text);
    if (k != std::floor(k)) {
      throw InvalidArgument("activations", "mvn sector count must be an integer");
    }
    return Activation::mvn_discrete(static_cast<int>(k));
  }
  if (name == "modrelu") {
    return Activation::modrelu(args.empty() ? -1.0 : parse_double(keyed("b"), text));
  }
  if (name == "type_a") {
    auto [re, im] = pair();
    return Activation::type_a(re, im);
  }
  if (name == "type_b") {
    auto [mag, ph] = pair();
    return Activation::type_b(mag, ph);
  }
  throw InvalidArgument("activations", "unknown activation '" + std::string(text) + "'");
}

std::vector<double> softmax(std::span<const double> x) {
  std::vector<double> out(x.size());
  if (x.empty()) {
    return out;
  }
  const double m = *std::max_element(x.begin(), x.end());
  double sum = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    out[i] = std::exp(x[i] - m);
    sum += out[i];
  }
  for (double& v : out) {
    v /= sum;
  }
  return out;
}

std::vector<double> output_map(OutputMap kind, std::span<const Complex> v) {
  std::vector<double> out(v.size());
  switch (kind) {
    case OutputMap::Abs:
      std::transform(v.begin(), v.end(), out.begin(), [](Complex z) { return modulus(z); });
      return out;
    case OutputMap::SqDiff:
      std::transform(v.begin(), v.end(), out.begin(), [](Complex z) {
        const double d = z.real() - z.imag();
        return d * d;
      });
      return out;
    case OutputMap::SoftmaxAbs:
      std::transform(v.begin(), v.end(), out.begin(), [](Complex z) { return modulus(z); });
      return softmax(out);
    case OutputMap::SoftmaxAvg:
      std::transform(v.begin(), v.end(), out.begin(), [](Complex z) { return 0.5 * (z.real() + z.imag()); });
      return softmax(out);
    case OutputMap::CastLabels:
      std::transform(v.begin(), v.end(), out.begin(), [](Complex z) { return 0.5 * (z.real() + z.imag()); });
      return out;
  }
  return out;
}

ComplexVector cast_labels(std::span<const double> labels) {
  ComplexVector out(labels.size());
  std::transform(labels.begin(), labels.end(), out.begin(), [](double c) { return Complex{c, c}; });
  return out;
}

std::string to_string(OutputMap m) {
  switch (m) {
    case OutputMap::Abs: return "abs";
    case OutputMap::SqDiff: return "sqdiff";
    case OutputMap::SoftmaxAbs: return "softmax_abs";
    case OutputMap::SoftmaxAvg: return "softmax_avg";
    case OutputMap::CastLabels: return "cast_labels";
  }
  return "abs";
}

OutputMap parse_output_map(std::string_view text) {
  text = trim(text);
  for (OutputMap m : {OutputMap::Abs, OutputMap::SqDiff, OutputMap::SoftmaxAbs, OutputMap::SoftmaxAvg,
                      OutputMap::CastLabels}) {
    if (text == to_string(m)) {
      return m;
    }
  }
  throw InvalidArgument("activations", "unknown output map '" + std::string(text) + "'");
}

}  // namespace cvnn
