#pragma once

#include <span>

#include "cvnn/complex.hpp"

namespace cvnn {

struct Vec2 {
  double re = 0.0;
  double im = 0.0;
  bool operator==(const Vec2&) const = default;
};

/// Symmetric 2x2 real matrix [[rr, ri], [ri, ii]]; symmetry holds by
/// construction since only three entries exist.
struct SymMatrix2 {
  double rr = 0.0;
  double ri = 0.0;
  double ii = 0.0;
  bool operator==(const SymMatrix2&) const = default;
};

/// General 2x2 real matrix acting on (Re, Im) column vectors.
struct Matrix2 {
  double rr = 0.0, ri = 0.0;
  double ir = 0.0, ii = 0.0;
};

Matrix2 to_matrix(const SymMatrix2& s);
Matrix2 operator*(const Matrix2& a, const Matrix2& b);
Vec2 operator*(const Matrix2& a, Vec2 v);

inline Vec2 to_vec(Complex z) { return {z.real(), z.imag()}; }
inline Complex to_complex(Vec2 v) { return {v.re, v.im}; }

struct BatchStatistics {
  Vec2 mean;
  SymMatrix2 cov;
};

/// Moving statistics and learnable affine of one complex BN unit.
struct BatchNormState {
  Vec2 moving_mean{};
  SymMatrix2 moving_cov{kInvSqrt2, 0.0, kInvSqrt2};
  SymMatrix2 gamma{kInvSqrt2, 0.0, kInvSqrt2};
  Vec2 beta{};
  double alpha = 0.9;
  double epsilon = 1e-5;

  static constexpr double kInvSqrt2 = 0.70710678118654752440;

  bool operator==(const BatchNormState&) const = default;
};

/// M with M*M*(V + eps I) = I, via the closed-form eigendecomposition of
/// a symmetric 2x2 matrix. Throws SingularStatisticsError when V + eps I
/// is not positive definite.
Matrix2 inv_sqrt_2x2_spd(const SymMatrix2& v, double epsilon);

/// Mean and population (1/N) covariance of (Re, Im) pairs.
BatchStatistics batch_statistics(std::span<const Complex> batch);

/// (V + eps I)^{-1/2} (x - mean) per element, no affine.
ComplexVector whiten(std::span<const Complex> batch, const BatchStatistics& stats, double epsilon);

struct BatchNormOutput {
  ComplexVector normalized;
  BatchStatistics stats;
};

/// Whitening with batch statistics followed by gamma x + beta.
/// Throws InsufficientBatchError for fewer than 2 samples.
BatchNormOutput bn_forward_train(const BatchNormState& state, std::span<const Complex> batch);

/// Momentum update of the moving mean and covariance.
BatchNormState bn_update_moving(const BatchNormState& state, const BatchStatistics& stats);

/// Inference path using the moving statistics.
ComplexVector bn_forward_infer(const BatchNormState& state, std::span<const Complex> batch);

/// The inference transform as an affine map y = A x + offset on (Re, Im).
struct AffineMap2 {
  Matrix2 linear;
  Vec2 offset;
};
AffineMap2 bn_inference_map(const BatchNormState& state);

/// Wirtinger partials (dy/dx, dy/dxbar) of a real-linear map of the plane.
WirtingerPair wirtinger_of_linear(const Matrix2& m);

}  // namespace cvnn
