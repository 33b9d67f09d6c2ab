#include <algorithm>
#include <cmath>
#include <vector>

#include "cvnn/batchnorm.hpp"
#include "cvnn/errors.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace cvnn;

namespace {

// Empirical population covariance, computed here without the library.
struct Cov {
  double xx, xy, yy;
};

Cov covariance(const ComplexVector& v) {
  double mx = 0, my = 0;
  for (Complex z : v) {
    mx += z.real();
    my += z.imag();
  }
  mx /= v.size();
  my /= v.size();
  Cov c{0, 0, 0};
  for (Complex z : v) {
    c.xx += (z.real() - mx) * (z.real() - mx);
    c.xy += (z.real() - mx) * (z.imag() - my);
    c.yy += (z.imag() - my) * (z.imag() - my);
  }
  c.xx /= v.size();
  c.xy /= v.size();
  c.yy /= v.size();
  return c;
}

// Samples with component covariance [[2,1],[1,2]] via its Cholesky factor.
ComplexVector correlated(oracle::Gen& g, std::size_t n) {
  std::normal_distribution<double> nd;
  std::mt19937 eng(static_cast<unsigned>(g.integer(0, 1 << 30)));
  const double l11 = std::sqrt(2.0), l21 = 1.0 / std::sqrt(2.0), l22 = std::sqrt(1.5);
  ComplexVector v(n);
  for (Complex& z : v) {
    const double a = nd(eng), b = nd(eng);
    z = {3.0 + l11 * a, -1.0 + l21 * a + l22 * b};
  }
  return v;
}

Matrix2 mul(const Matrix2& a, const Matrix2& b) {
  return {a.rr * b.rr + a.ri * b.ir, a.rr * b.ri + a.ri * b.ii, a.ir * b.rr + a.ii * b.ir, a.ir * b.ri + a.ii * b.ii};
}

}  // namespace

TEST_CASE("inverse square root small cases") {
  const Matrix2 id = inv_sqrt_2x2_spd({1, 0, 1}, 0.0);
  CHECK(id.rr == doctest::Approx(1.0));
  CHECK(id.ri == doctest::Approx(0.0));
  CHECK(id.ii == doctest::Approx(1.0));
  const Matrix2 d = inv_sqrt_2x2_spd({4, 0, 9}, 0.0);
  CHECK(d.rr == doctest::Approx(0.5));
  CHECK(d.ii == doctest::Approx(1.0 / 3.0));
  CHECK(std::abs(d.ri) < 1e-15);
}

TEST_CASE("inverse square root of random SPD matrices") {
  oracle::Gen g(61);
  for (int i = 0; i < 1000; ++i) {
    const double a = g.uniform(0.01, 5), c = g.uniform(0.01, 5);
    const double b = g.uniform(-0.99, 0.99) * std::sqrt(a * c);
    const Matrix2 m = inv_sqrt_2x2_spd({a, b, c}, 0.0);
    CHECK(m.ri == m.ir);
    const Matrix2 p = mul(mul(m, m), Matrix2{a, b, b, c});
    CHECK(std::abs(p.rr - 1) <= 1e-10);
    CHECK(std::abs(p.ii - 1) <= 1e-10);
    CHECK(std::abs(p.ri) <= 1e-10);
    CHECK(std::abs(p.ir) <= 1e-10);
  }
}

TEST_CASE("inverse square root rejects indefinite input") {
  CHECK_THROWS_AS(inv_sqrt_2x2_spd({1, 2, 1}, 0.0), SingularStatisticsError);
  CHECK_THROWS_AS(inv_sqrt_2x2_spd({0, 0, 0}, 0.0), SingularStatisticsError);
  CHECK_NOTHROW(inv_sqrt_2x2_spd({0, 0, 0}, 1e-5));
  CHECK_THROWS_AS(inv_sqrt_2x2_spd({std::nan(""), 0, 1}, 1e-5), SingularStatisticsError);
}

TEST_CASE("default state") {
  const BatchNormState s;
  CHECK(s.moving_mean == Vec2{0, 0});
  CHECK(s.moving_cov == SymMatrix2{std::sqrt(0.5), 0, std::sqrt(0.5)});
  CHECK(s.gamma == SymMatrix2{std::sqrt(0.5), 0, std::sqrt(0.5)});
  CHECK(s.beta == Vec2{0, 0});
  CHECK(s.epsilon == 1e-5);
}

TEST_CASE("constant batch normalises to beta") {
  const ComplexVector batch(10, Complex(2.5, -1.0));
  const BatchNormOutput out = bn_forward_train(BatchNormState{}, batch);
  for (Complex z : out.normalized) CHECK(z == Complex{});
  BatchNormState shifted;
  shifted.beta = {0.25, -3.0};
  for (Complex z : bn_forward_train(shifted, batch).normalized) CHECK(z == Complex(0.25, -3.0));
}

TEST_CASE("whitening removes correlation") {
  oracle::Gen g(62);
  for (int rep = 0; rep < 5; ++rep) {
    const ComplexVector batch = correlated(g, 1024);
    const BatchStatistics stats = batch_statistics(batch);
    const Cov ref = covariance(batch);
    CHECK(stats.cov.rr == doctest::Approx(ref.xx).epsilon(1e-12));
    CHECK(stats.cov.ri == doctest::Approx(ref.xy).epsilon(1e-12));
    const Cov w = covariance(whiten(batch, stats, 0.0));
    CHECK(std::abs(w.xx - 1) <= 1e-10);
    CHECK(std::abs(w.yy - 1) <= 1e-10);
    CHECK(std::abs(w.xy) <= 1e-10);
    BatchNormState s;
    s.epsilon = 0.0;
    const Cov scaled = covariance(bn_forward_train(s, batch).normalized);
    CHECK(std::abs(scaled.xx - 0.5) <= 1e-10);
    CHECK(std::abs(scaled.yy - 0.5) <= 1e-10);
  }
}

TEST_CASE("too small a batch") {
  CHECK_THROWS_AS(bn_forward_train(BatchNormState{}, ComplexVector{1.0}), InsufficientBatchError);
  CHECK_THROWS_AS(bn_forward_train(BatchNormState{}, ComplexVector{}), InsufficientBatchError);
}

TEST_CASE("moving statistics") {
  BatchNormState s;
  const BatchStatistics stats{{1, 1}, {3, 0.5, 2}};
  CHECK(bn_update_moving([&] { auto t = s; t.alpha = 1.0; return t; }(), stats).moving_mean == s.moving_mean);
  s.alpha = 0.0;
  const BatchNormState z = bn_update_moving(s, stats);
  CHECK(z.moving_mean == stats.mean);
  CHECK(z.moving_cov == stats.cov);
  s.alpha = 0.9;
  const BatchNormState n = bn_update_moving(s, stats);
  CHECK(n.moving_mean.re == doctest::Approx(0.1));
  CHECK(n.moving_mean.im == doctest::Approx(0.1));
}

TEST_CASE("moving averages stay in the envelope of their history") {
  oracle::Gen g(63);
  BatchNormState s;
  double lo[5], hi[5];
  auto entries = [](const BatchNormState& t) {
    return std::vector<double>{t.moving_mean.re, t.moving_mean.im, t.moving_cov.rr, t.moving_cov.ri, t.moving_cov.ii};
  };
  auto e0 = entries(s);
  for (int k = 0; k < 5; ++k) lo[k] = hi[k] = e0[k];
  for (int step = 0; step < 100; ++step) {
    const BatchStatistics stats = batch_statistics(g.points(32, 3.0));
    const std::vector<double> obs{stats.mean.re, stats.mean.im, stats.cov.rr, stats.cov.ri, stats.cov.ii};
    for (int k = 0; k < 5; ++k) {
      lo[k] = std::min(lo[k], obs[k]);
      hi[k] = std::max(hi[k], obs[k]);
    }
    s = bn_update_moving(s, stats);
    const auto now = entries(s);
    for (int k = 0; k < 5; ++k) {
      CHECK(now[k] >= lo[k] - 1e-15);
      CHECK(now[k] <= hi[k] + 1e-15);
    }
  }
}

TEST_CASE("inference is the hand-composed affine map") {
  oracle::Gen g(64);
  BatchNormState s;
  s.moving_mean = {0.3, -0.2};
  s.moving_cov = {1.5, 0.4, 0.8};
  s.gamma = {0.9, 0.1, 1.2};
  s.beta = {0.5, 0.25};
  // (V + eps)^{-1/2} by eigen decomposition written out here.
  const double a = 1.5 + s.epsilon, b = 0.4, c = 0.8 + s.epsilon;
  const double mid = 0.5 * (a + c), rad = std::hypot(0.5 * (a - c), b);
  const double l1 = mid + rad, l2 = mid - rad;
  const double t = 0.5 * std::atan2(2 * b, a - c);
  const double co = std::cos(t), si = std::sin(t);
  const double i1 = 1 / std::sqrt(l1), i2 = 1 / std::sqrt(l2);
  const Matrix2 m{co * co * i1 + si * si * i2, co * si * (i1 - i2), co * si * (i1 - i2), si * si * i1 + co * co * i2};
  const Matrix2 gm = mul(Matrix2{0.9, 0.1, 0.1, 1.2}, m);
  const ComplexVector batch = g.points(20);
  const ComplexVector out = bn_forward_infer(s, batch);
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const double x = batch[i].real() - 0.3, y = batch[i].imag() + 0.2;
    const Complex want{gm.rr * x + gm.ri * y + 0.5, gm.ir * x + gm.ii * y + 0.25};
    CHECK(std::abs(out[i] - want) <= 1e-12);
  }
  CHECK(bn_forward_infer(s, batch) == out);
  const AffineMap2 map = bn_inference_map(s);
  CHECK(std::abs(map.linear.rr - gm.rr) <= 1e-12);
  CHECK(std::abs(map.linear.ri - gm.ri) <= 1e-12);
}

TEST_CASE("inference offset") {
  BatchNormState s;
  s.beta = {1.0, 0.0};
  const ComplexVector out = bn_forward_infer(s, ComplexVector{0.0});
  CHECK(out[0].real() == 1.0);
  CHECK(out[0].imag() == 0.0);
}

TEST_CASE("inference rejects singular moving covariance") {
  BatchNormState s;
  s.moving_cov = {1.0, 2.0, 1.0};
  CHECK_THROWS_AS(bn_forward_infer(s, ComplexVector{1.0}), SingularStatisticsError);
}

TEST_CASE("Wirtinger partials of a linear map") {
  oracle::Gen g(65);
  for (int i = 0; i < 100; ++i) {
    const Matrix2 m{g.uniform(-2, 2), g.uniform(-2, 2), g.uniform(-2, 2), g.uniform(-2, 2)};
    const auto f = [&](Complex z) {
      return Complex(m.rr * z.real() + m.ri * z.imag(), m.ir * z.real() + m.ii * z.imag());
    };
    const WirtingerPair p = wirtinger_of_linear(m);
    const auto fd = oracle::wirtinger(f, g.point());
    CHECK(std::abs(p.d_dz - fd.dz) <= 1e-8);
    CHECK(std::abs(p.d_dzbar - fd.dzbar) <= 1e-8);
  }
}
