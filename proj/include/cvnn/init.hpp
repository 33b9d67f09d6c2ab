#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <string>
#include <string_view>

#include "cvnn/complex.hpp"

namespace cvnn {

/// Seeded uniform generator. Backed by the 64-bit Mersenne Twister, whose
/// output sequence is fixed by the C++ standard; doubles are formed from
/// the top 53 bits so draws are reproducible across platforms.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }
  /// Uniform on [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  /// Uniform on [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Uniform index in [0, n).
  std::size_t index(std::size_t n) { return static_cast<std::size_t>(uniform() * static_cast<double>(n)); }
  /// Standard normal via Box-Muller.
  double normal();

 private:
  std::mt19937_64 engine_;
};

inline RngStream rng_stream(std::uint64_t seed) { return RngStream(seed); }

enum class InitScheme { PolarRayleigh, RectUniform };

struct InitSpec {
  InitScheme scheme = InitScheme::PolarRayleigh;
  std::size_t n_in = 1;
  std::size_t n_out = 1;
  std::uint64_t seed = 0;
};

/// Rayleigh parameter 1/sqrt(n_in + n_out).
double rayleigh_sigma(std::size_t n_in, std::size_t n_out);
/// Per-component bound sqrt(3)/sqrt(n_in + n_out).
double rect_bound(std::size_t n_in, std::size_t n_out);

/// Samples every entry. PolarRayleigh: |w| ~ Rayleigh(sigma) by inverse
/// CDF, phase ~ U[0, pi). RectUniform: Re, Im ~ U[-bound, bound].
ComplexMatrix init_weights(const InitSpec& spec, std::size_t rows, std::size_t cols);

std::string to_string(InitScheme s);
InitScheme parse_init_scheme(std::string_view text);

}  // namespace cvnn
