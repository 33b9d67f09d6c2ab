#include "cvnn/losses.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "cvnn/errors.hpp"

namespace cvnn {

namespace {

constexpr double kProbFloor = 1e-12;

void check_lengths(std::span<const Complex> o, std::span<const Complex> d) {
  if (o.size() != d.size()) {
    throw ShapeError("losses", "output has " + std::to_string(o.size()) + " entries but target has " +
                                   std::to_string(d.size()));
  }
  if (o.empty()) {
    throw ShapeError("losses", "empty output vector");
  }
}

void check_log_domain(std::span<const Complex> o, std::span<const Complex> d) {
  for (std::size_t k = 0; k < o.size(); ++k) {
    if (modulus(o[k]) == 0.0 || modulus(d[k]) == 0.0) {
      throw DomainError("losses", "logarithmic loss undefined for zero magnitude at index " + std::to_string(k));
    }
  }
}

void check_ace_domain(std::span<const Complex> o, std::span<const Complex> d) {
  double total = 0.0;
  for (std::size_t k = 0; k < d.size(); ++k) {
    if (d[k].imag() != 0.0 || d[k].real() < 0.0 || d[k].real() > 1.0) {
      throw DomainError("losses", "cross-entropy target must be a real distribution");
    }
    total += d[k].real();
    const auto in_unit = [](double v) { return v >= 0.0 && v <= 1.0; };
    if (!in_unit(o[k].real()) || !in_unit(o[k].imag())) {
      throw DomainError("losses", "cross-entropy inputs must be probabilities in each part");
    }
  }
  if (std::abs(total - 1.0) > 1e-9) {
    throw DomainError("losses", "cross-entropy target must sum to 1");
  }
}

std::vector<double> real_parts(std::span<const Complex> v) {
  std::vector<double> out(v.size());
  std::transform(v.begin(), v.end(), out.begin(), [](Complex z) { return z.real(); });
  return out;
}

std::vector<double> imag_parts(std::span<const Complex> v) {
  std::vector<double> out(v.size());
  std::transform(v.begin(), v.end(), out.begin(), [](Complex z) { return z.imag(); });
  return out;
}

double ce_derivative(double p, double d) { return p > kProbFloor ? -d / p : 0.0; }

}  // namespace

double cross_entropy(std::span<const double> p, std::span<const double> d) {
  double sum = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) {
    if (d[k] != 0.0) {
      sum -= d[k] * std::log(std::max(p[k], kProbFloor));
    }
  }
  return sum;
}

double loss(LossKind kind, std::span<const Complex> o, std::span<const Complex> d) {
  check_lengths(o, d);
  switch (kind) {
    case LossKind::Quadratic: {
      double sum = 0.0;
      for (std::size_t k = 0; k < o.size(); ++k) {
        sum += std::norm(d[k] - o[k]);
      }
      return 0.5 * sum;
    }
    case LossKind::Logarithmic: {
      check_log_domain(o, d);
      double sum = 0.0;
      for (std::size_t k = 0; k < o.size(); ++k) {
        const double log_ratio = std::log(modulus(d[k]) / modulus(o[k]));
        const double dphi = wrap_phase(phase(d[k]) - phase(o[k]));
        sum += 0.5 * (log_ratio * log_ratio + dphi * dphi);
      }
      return sum;
    }
    case LossKind::AverageCrossEntropy: {
      check_ace_domain(o, d);
      const auto target = real_parts(d);
      return 0.5 * (cross_entropy(real_parts(o), target) + cross_entropy(imag_parts(o), target));
    }
  }
  return 0.0;
}

std::vector<WirtingerPair> loss_partials(LossKind kind, std::span<const Complex> o,
                                         std::span<const Complex> d) {
  check_lengths(o, d);
  std::vector<Complex> dz(o.size());
  switch (kind) {
    case LossKind::Quadratic:
      // E = 1/2 (d - o)(dbar - obar)
      for (std::size_t k = 0; k < o.size(); ++k) {
        dz[k] = -0.5 * std::conj(d[k] - o[k]);
      }
      break;
    case LossKind::Logarithmic:
      check_log_domain(o, d);
      // d ln|o| / do = 1/(2o), d arg(o) / do = -i/(2o)
      for (std::size_t k = 0; k < o.size(); ++k) {
        const double log_ratio = std::log(modulus(d[k]) / modulus(o[k]));
        const double dphi = wrap_phase(phase(d[k]) - phase(o[k]));
        dz[k] = Complex{-log_ratio, dphi} / (2.0 * o[k]);
      }
      break;
    case LossKind::AverageCrossEntropy:
      check_ace_domain(o, d);
      for (std::size_t k = 0; k < o.size(); ++k) {
        const double dx = 0.5 * ce_derivative(o[k].real(), d[k].real());
        const double dy = 0.5 * ce_derivative(o[k].imag(), d[k].real());
        dz[k] = 0.5 * Complex{dx, -dy};
      }
      break;
  }
  std::vector<WirtingerPair> out(o.size());
  for (std::size_t k = 0; k < o.size(); ++k) {
    out[k] = {dz[k], std::conj(dz[k])};
  }
  return out;
}

double loss_kink_distance(LossKind kind, std::span<const Complex> o, std::span<const Complex> d) {
  double dist = std::numeric_limits<double>::infinity();
  if (kind != LossKind::Logarithmic) {
    return dist;
  }
  for (std::size_t k = 0; k < o.size() && k < d.size(); ++k) {
    const double r = modulus(o[k]);
    const double dphi = wrap_phase(phase(d[k]) - phase(o[k]));
    // arc distance from o to the seam where the wrapped difference jumps
    dist = std::min({dist, r, r * (kPi - std::abs(dphi))});
  }
  return dist;
}

std::string to_string(LossKind kind) {
  switch (kind) {
    case LossKind::Quadratic: return "quadratic";
    case LossKind::Logarithmic: return "log";
    case LossKind::AverageCrossEntropy: return "ace";
  }
  return "quadratic";
}

LossKind parse_loss(std::string_view text) {
  if (text == "quadratic") return LossKind::Quadratic;
  if (text == "log") return LossKind::Logarithmic;
  if (text == "ace") return LossKind::AverageCrossEntropy;
  throw InvalidArgument("losses", "unknown loss '" + std::string(text) + "'");
}

}  // namespace cvnn
