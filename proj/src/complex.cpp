#include "cvnn/complex.hpp"

#include <cmath>
#include <sstream>

#include "cvnn/errors.hpp"

namespace cvnn {

double phase(Complex z) {
  if (z.real() == 0.0 && z.imag() == 0.0) {
    return 0.0;
  }
  const double a = std::atan2(z.imag(), z.real());
  // atan2 returns -pi for (-x, -0.0); the principal interval is (-pi, pi].
  return a == -kPi ? kPi : a;
}

double wrap_phase(double angle) {
  double r = std::remainder(angle, 2.0 * kPi);
  if (r <= -kPi) {
    r += 2.0 * kPi;
  }
  return r;
}

Complex phasor(double theta) {
  const double reduced = std::fmod(theta, 2.0 * kPi);
  if (reduced == 0.0) {
    return {1.0, 0.0};
  }
  return {std::cos(reduced), std::sin(reduced)};
}

bool is_finite(Complex z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

namespace {

struct PartialsXY {
  Complex df_dx;
  Complex df_dy;
};

Complex eval_checked(const ComplexFn& f, Complex at) {
  const Complex v = f(at);
  if (!is_finite(v)) {
    std::ostringstream os;
    os.precision(17);
    os << "non-finite value at stencil point (" << at.real() << ", " << at.imag() << ")";
    throw OracleEvaluationError("complex-core", os.str());
  }
  return v;
}

PartialsXY central_differences(const ComplexFn& f, Complex z, double h) {
  if (!(h > 0.0)) {
    throw InvalidArgument("complex-core", "finite-difference step must be positive");
  }
  const Complex dx{h, 0.0};
  const Complex dy{0.0, h};
  const Complex fxp = eval_checked(f, z + dx);
  const Complex fxm = eval_checked(f, z - dx);
  const Complex fyp = eval_checked(f, z + dy);
  const Complex fym = eval_checked(f, z - dy);
  return {(fxp - fxm) / (2.0 * h), (fyp - fym) / (2.0 * h)};
}

}  // namespace

WirtingerPair wirtinger_partials_fd(const ComplexFn& f, Complex z, double h) {
  const auto [fx, fy] = central_differences(f, z, h);
  const Complex i{0.0, 1.0};
  return {0.5 * (fx - i * fy), 0.5 * (fx + i * fy)};
}

double cauchy_riemann_residual(const ComplexFn& f, Complex z, double h) {
  const auto [fx, fy] = central_differences(f, z, h);
  // f = u + iv: fx = u_x + i v_x, fy = u_y + i v_y
  return std::abs(fx.real() - fy.imag()) + std::abs(fy.real() + fx.imag());
}

}  // namespace cvnn
