#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <numbers>
#include <span>
#include <vector>

namespace cvnn {

using Complex = std::complex<double>;
using ComplexVector = std::vector<Complex>;
using ComplexFn = std::function<Complex(Complex)>;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kDefaultStep = 1e-6;

/// Dense row-major complex matrix.
class ComplexMatrix {
 public:
  ComplexMatrix() = default;
  ComplexMatrix(std::size_t rows, std::size_t cols, Complex fill = {})
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }

  Complex& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  const Complex& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<Complex> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const Complex> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  std::span<Complex> data() noexcept { return data_; }
  std::span<const Complex> data() const noexcept { return data_; }

  bool operator==(const ComplexMatrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<Complex> data_;
};

/// The pair (df/dz, df/dzbar) at a point.
struct WirtingerPair {
  Complex d_dz;
  Complex d_dzbar;
};

/// |z|.
inline double modulus(Complex z) { return std::abs(z); }

/// Principal argument in (-pi, pi]; phase(0) == 0.
double phase(Complex z);

/// Wraps an angle into (-pi, pi].
double wrap_phase(double angle);

/// e^{i*theta} with exact reduction modulo 2*pi, so that whole turns
/// (theta == 2*pi*k in floating point) yield exactly 1.
Complex phasor(double theta);

bool is_finite(Complex z);

/// Central-difference Wirtinger partials of `f` at `z`.
WirtingerPair wirtinger_partials_fd(const ComplexFn& f, Complex z, double h = kDefaultStep);

/// Steepest-ascent direction 2*df/dzbar for a real-valued f.
inline Complex gradient_from_pair(const WirtingerPair& p) { return 2.0 * p.d_dzbar; }

/// |u_x - v_y| + |u_y + v_x| from central differences.
double cauchy_riemann_residual(const ComplexFn& f, Complex z, double h = kDefaultStep);

}  // namespace cvnn
