#include "cvnn/init.hpp"

#include <cmath>

#include "cvnn/errors.hpp"

namespace cvnn {

double RngStream::normal() {
  const double u1 = 1.0 - uniform();  // (0, 1]
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
}

double rayleigh_sigma(std::size_t n_in, std::size_t n_out) {
  return 1.0 / std::sqrt(static_cast<double>(n_in + n_out));
}

double rect_bound(std::size_t n_in, std::size_t n_out) {
  return std::sqrt(3.0) / std::sqrt(static_cast<double>(n_in + n_out));
}

ComplexMatrix init_weights(const InitSpec& spec, std::size_t rows, std::size_t cols) {
  if (spec.n_in < 1 || spec.n_out < 1) {
    throw InvalidArgument("init", "fan-in and fan-out must be positive");
  }
  ComplexMatrix w(rows, cols);
  RngStream rng(spec.seed);
  switch (spec.scheme) {
    case InitScheme::PolarRayleigh: {
      const double sigma = rayleigh_sigma(spec.n_in, spec.n_out);
      for (Complex& v : w.data()) {
        const double magnitude = sigma * std::sqrt(-2.0 * std::log(1.0 - rng.uniform()));
        const double angle = kPi * rng.uniform();
        v = std::polar(magnitude, angle);
      }
      break;
    }
    case InitScheme::RectUniform: {
      const double bound = rect_bound(spec.n_in, spec.n_out);
      for (Complex& v : w.data()) {
        const double re = rng.uniform(-bound, bound);
        const double im = rng.uniform(-bound, bound);
        v = {re, im};
      }
      break;
    }
  }
  return w;
}

std::string to_string(InitScheme s) { return s == InitScheme::PolarRayleigh ? "polar" : "rect"; }

InitScheme parse_init_scheme(std::string_view text) {
  if (text == "polar") return InitScheme::PolarRayleigh;
  if (text == "rect") return InitScheme::RectUniform;
  throw InvalidArgument("init", "unknown init scheme '" + std::string(text) + "'");
}

}  // namespace cvnn
