#include "cvnn/batchnorm.hpp"

#include <cmath>
#include <string>

#include "cvnn/errors.hpp"

namespace cvnn {

Matrix2 to_matrix(const SymMatrix2& s) { return {s.rr, s.ri, s.ri, s.ii}; }

Matrix2 operator*(const Matrix2& a, const Matrix2& b) {
  return {a.rr * b.rr + a.ri * b.ir, a.rr * b.ri + a.ri * b.ii,
          a.ir * b.rr + a.ii * b.ir, a.ir * b.ri + a.ii * b.ii};
}

Vec2 operator*(const Matrix2& a, Vec2 v) {
  return {a.rr * v.re + a.ri * v.im, a.ir * v.re + a.ii * v.im};
}

Matrix2 inv_sqrt_2x2_spd(const SymMatrix2& v, double epsilon) {
  const double a = v.rr + epsilon;
  const double c = v.ii + epsilon;
  const double b = v.ri;
  if (!std::isfinite(a) || !std::isfinite(b) || !std::isfinite(c)) {
    throw SingularStatisticsError("batchnorm", "non-finite covariance");
  }
  const double mean = 0.5 * (a + c);
  const double spread = std::hypot(0.5 * (a - c), b);
  const double large = mean + spread;
  if (!(large > 0.0)) {
    throw SingularStatisticsError("batchnorm", "covariance is not positive definite");
  }
  // det / large avoids cancellation in mean - spread
  const double small = (a * c - b * b) / large;
  if (!(small > 0.0)) {
    throw SingularStatisticsError("batchnorm", "covariance is not positive definite");
  }
  const double theta = 0.5 * std::atan2(2.0 * b, a - c);
  const double cs = std::cos(theta);
  const double sn = std::sin(theta);
  const double s1 = 1.0 / std::sqrt(large);
  const double s2 = 1.0 / std::sqrt(small);
  // R diag(s1, s2) R^T with R = [[cs, -sn], [sn, cs]]
  const double rr = s1 * cs * cs + s2 * sn * sn;
  const double ii = s1 * sn * sn + s2 * cs * cs;
  const double ri = (s1 - s2) * cs * sn;
  return {rr, ri, ri, ii};
}

BatchStatistics batch_statistics(std::span<const Complex> batch) {
  BatchStatistics s;
  if (batch.empty()) {
    return s;
  }
  const double n = static_cast<double>(batch.size());
  for (Complex z : batch) {
    s.mean.re += z.real();
    s.mean.im += z.imag();
  }
  s.mean.re /= n;
  s.mean.im /= n;
  for (Complex z : batch) {
    const double dr = z.real() - s.mean.re;
    const double di = z.imag() - s.mean.im;
    s.cov.rr += dr * dr;
    s.cov.ri += dr * di;
    s.cov.ii += di * di;
  }
  s.cov.rr /= n;
  s.cov.ri /= n;
  s.cov.ii /= n;
  return s;
}

ComplexVector whiten(std::span<const Complex> batch, const BatchStatistics& stats, double epsilon) {
  const Matrix2 m = inv_sqrt_2x2_spd(stats.cov, epsilon);
  ComplexVector out(batch.size());
  for (std::size_t k = 0; k < batch.size(); ++k) {
    const Vec2 centered{batch[k].real() - stats.mean.re, batch[k].imag() - stats.mean.im};
    out[k] = to_complex(m * centered);
  }
  return out;
}

namespace {

ComplexVector apply_affine(const BatchNormState& state, ComplexVector whitened) {
  const Matrix2 g = to_matrix(state.gamma);
  for (Complex& z : whitened) {
    const Vec2 y = g * to_vec(z);
    z = {y.re + state.beta.re, y.im + state.beta.im};
  }
  return whitened;
}

}  // namespace

BatchNormOutput bn_forward_train(const BatchNormState& state, std::span<const Complex> batch) {
  if (batch.size() < 2) {
    throw InsufficientBatchError("batchnorm", "batch of " + std::to_string(batch.size()) +
                                                  " cannot estimate covariance; need at least 2");
  }
  BatchNormOutput out;
  out.stats = batch_statistics(batch);
  out.normalized = apply_affine(state, whiten(batch, out.stats, state.epsilon));
  return out;
}

BatchNormState bn_update_moving(const BatchNormState& state, const BatchStatistics& stats) {
  BatchNormState next = state;
  const double a = state.alpha;
  const double b = 1.0 - state.alpha;
  next.moving_mean = {a * state.moving_mean.re + b * stats.mean.re, a * state.moving_mean.im + b * stats.mean.im};
  next.moving_cov = {a * state.moving_cov.rr + b * stats.cov.rr, a * state.moving_cov.ri + b * stats.cov.ri,
                     a * state.moving_cov.ii + b * stats.cov.ii};
  return next;
}

ComplexVector bn_forward_infer(const BatchNormState& state, std::span<const Complex> batch) {
  return apply_affine(state, whiten(batch, {state.moving_mean, state.moving_cov}, state.epsilon));
}

AffineMap2 bn_inference_map(const BatchNormState& state) {
  const Matrix2 linear = to_matrix(state.gamma) * inv_sqrt_2x2_spd(state.moving_cov, state.epsilon);
  const Vec2 shifted = linear * state.moving_mean;
  return {linear, {state.beta.re - shifted.re, state.beta.im - shifted.im}};
}

WirtingerPair wirtinger_of_linear(const Matrix2& m) {
  // y = (m.rr x + m.ri v) + i (m.ir x + m.ii v) for z = x + iv
  const Complex dx{m.rr, m.ir};
  const Complex dv{m.ri, m.ii};
  const Complex i{0.0, 1.0};
  return {0.5 * (dx - i * dv), 0.5 * (dx + i * dv)};
}

}  // namespace cvnn
