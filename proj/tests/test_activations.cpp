#include <algorithm>
#include <cmath>
#include <vector>

#include "cvnn/activations.hpp"
#include "cvnn/errors.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace cvnn;

namespace {

bool near(Complex a, Complex b, double tol) { return std::abs(a - b) <= tol; }

std::vector<Activation> differentiable_kinds() {
  return {Activation::identity(),
          Activation::complex_tanh(),
          Activation::crelu(),
          Activation::zrelu(),
          Activation::modrelu(-1.0),
          Activation::modrelu(0.5),
          Activation::cardioid(),
          Activation::mvn_continuous(),
          Activation::type_a(RealFn::Sigmoid, RealFn::Tanh),
          Activation::type_a(RealFn::Relu, RealFn::Identity),
          Activation::type_b(RealFn::Tanh, RealFn::Identity),
          Activation::type_b(RealFn::Sigmoid, RealFn::Identity),
          Activation::type_b(RealFn::Identity, RealFn::Tanh),
          Activation::type_b(RealFn::Relu, RealFn::Sigmoid)};
}

}  // namespace

TEST_CASE("activation values") {
  CHECK(apply_activation(Activation::crelu(), {-1, 2}) == Complex(0, 2));
  CHECK(apply_activation(Activation::zrelu(), {1, 1}) == Complex(1, 1));
  CHECK(apply_activation(Activation::zrelu(), {-1, 1}) == Complex(0, 0));
  CHECK(apply_activation(Activation::modrelu(-1.0), 2.0) == Complex(1, 0));
  CHECK(apply_activation(Activation::modrelu(-1.0), 0.5) == Complex(0, 0));
  CHECK(apply_activation(Activation::cardioid(), 3.0) == Complex(3, 0));
  CHECK(std::abs(apply_activation(Activation::cardioid(), std::polar(2.0, kPi))) < 1e-15);
  CHECK(near(apply_activation(Activation::cardioid(), {0, 1}), {0, 0.5}, 1e-15));
  CHECK(near(apply_activation(Activation::mvn_continuous(), {3, 4}), {0.6, 0.8}, 1e-15));
  CHECK(apply_activation(Activation::mvn_discrete(4), std::polar(1.7, 0.3)) == Complex(1, 0));
  CHECK(near(apply_activation(Activation::mvn_discrete(4), std::polar(1.0, 2.0)), {0, 1}, 1e-15));
  CHECK(apply_activation(Activation::identity(), {1.5, -2}) == Complex(1.5, -2));
}

TEST_CASE("values at the origin") {
  CHECK(apply_activation(Activation::modrelu(1.0), 0.0) == Complex{});
  CHECK(apply_activation(Activation::cardioid(), 0.0) == Complex{});
  CHECK(apply_activation(Activation::mvn_continuous(), 0.0) == Complex{});
  CHECK(apply_activation(Activation::type_b(RealFn::Sigmoid, RealFn::Identity), 0.0) == Complex(0.5, 0));
  CHECK(apply_activation(Activation::zrelu(), 0.0) == Complex{});
  CHECK(apply_activation(Activation::zrelu(), 2.0) == Complex(2, 0));
}

TEST_CASE("analytic partials at fixed points") {
  auto p = activation_partials(Activation::identity(), {3, 1});
  CHECK(p.d_dz == Complex(1, 0));
  CHECK(p.d_dzbar == Complex(0, 0));
  p = activation_partials(Activation::complex_tanh(), 0.0);
  CHECK(p.d_dz == Complex(1, 0));
  CHECK(p.d_dzbar == Complex(0, 0));
  p = activation_partials(Activation::crelu(), {-1, 2});
  CHECK(p.d_dz == Complex(0.5, 0));
  CHECK(p.d_dzbar == Complex(-0.5, 0));
  const auto fd = oracle::wirtinger([](Complex z) { return apply_activation(Activation::crelu(), z); }, {-1, 2});
  CHECK(near(p.d_dz, fd.dz, 1e-5));
  CHECK(near(p.d_dzbar, fd.dzbar, 1e-5));
}

TEST_CASE("analytic partials match the finite-difference oracle") {
  oracle::Gen g(11);
  for (const Activation& a : differentiable_kinds()) {
    CAPTURE(to_string(a));
    int checked = 0;
    while (checked < 1000) {
      const Complex z = g.point(2.5);
      if (kink_distance(a, z) < 1e-2) continue;
      ++checked;
      const auto got = activation_partials(a, z);
      const auto want = oracle::wirtinger([&](Complex w) { return apply_activation(a, w); }, z);
      // relative to the size of the pair, since one partial is often zero
      const double scale = std::max({std::abs(got.d_dz), std::abs(got.d_dzbar), std::abs(want.dz),
                                     std::abs(want.dzbar), 1e-4});
      const double e1 = std::abs(got.d_dz - want.dz) / scale;
      const double e2 = std::abs(got.d_dzbar - want.dzbar) / scale;
      CHECK(e1 <= 1e-5);
      CHECK(e2 <= 1e-5);
    }
  }
}

TEST_CASE("kink partials take the derivative-zero side") {
  CHECK(real_derivative(RealFn::Relu, 0.0) == 0.0);
  const auto p = activation_partials(Activation::crelu(), {0.0, 0.0});
  CHECK(p.d_dz == Complex{});
  CHECK(p.d_dzbar == Complex{});
  CHECK(activation_partials(Activation::zrelu(), {0.0, 1.0}).d_dz == Complex{});
  CHECK(activation_partials(Activation::modrelu(-1.0), 1.0).d_dz == Complex{});
}

TEST_CASE("mvn discrete has no derivative") {
  CHECK_THROWS_AS(activation_partials(Activation::mvn_discrete(3), 1.0), NonDifferentiableError);
  CHECK_FALSE(is_differentiable(Activation::mvn_discrete(3)));
  CHECK(is_differentiable(Activation::mvn_continuous()));
}

TEST_CASE("parameter validation") {
  CHECK_THROWS_AS(Activation::mvn_discrete(1), InvalidArgument);
  CHECK_THROWS_AS(Activation::modrelu(std::nan("")), InvalidArgument);
  CHECK_THROWS_AS(Activation::modrelu(INFINITY), InvalidArgument);
  CHECK_THROWS_AS(parse_activation("softsign"), InvalidArgument);
  CHECK_THROWS_AS(parse_activation("mvn(k=2.5)"), InvalidArgument);
}

TEST_CASE("phase preservation and unit modulus") {
  oracle::Gen g(12);
  for (int i = 0; i < 1000; ++i) {
    const Complex z = g.point(3.0);
    for (const Activation& a : {Activation::modrelu(-0.5), Activation::cardioid(), Activation::mvn_continuous()}) {
      const Complex out = apply_activation(a, z);
      if (out != Complex{}) {
        CHECK(std::abs(wrap_phase(phase(out) - phase(z))) <= 1e-12);
      }
    }
    CHECK(std::abs(modulus(apply_activation(Activation::mvn_continuous(), z)) - 1.0) <= 1e-15);
    CHECK(std::abs(modulus(apply_activation(Activation::mvn_discrete(5), z)) - 1.0) <= 1e-15);
  }
}

TEST_CASE("identity type-a is exactly the identity") {
  oracle::Gen g(13);
  const Activation a = Activation::type_a(RealFn::Identity, RealFn::Identity);
  for (int i = 0; i < 1000; ++i) {
    const Complex z = g.point(100.0);
    CHECK(apply_activation(a, z) == z);
  }
}

TEST_CASE("crelu on the positive real axis is relu") {
  oracle::Gen g(14);
  for (int i = 0; i < 1000; ++i) {
    const double x = g.uniform(0.0, 50.0);
    CHECK(apply_activation(Activation::crelu(), Complex(x, 0.0)) == Complex(x, 0.0));
  }
  CHECK(apply_activation(Activation::crelu(), Complex(0.0, 0.0)) == Complex(0.0, 0.0));
}

TEST_CASE("bounded kinds stay bounded, complex tanh does not") {
  oracle::Gen g(15);
  const Activation sig_a = Activation::type_a(RealFn::Sigmoid, RealFn::Sigmoid);
  const Activation sig_b = Activation::type_b(RealFn::Sigmoid, RealFn::Identity);
  for (int i = 0; i < 10000; ++i) {
    const Complex z = g.point(50.0);
    CHECK(modulus(apply_activation(sig_a, z)) <= std::sqrt(2.0));
    CHECK(modulus(apply_activation(sig_b, z)) <= 1.0);
    CHECK(modulus(apply_activation(Activation::mvn_continuous(), z)) <= 1.0 + 1e-15);
  }
  const Complex near_pole{0.0, kPi / 2 - 1e-4};
  CHECK(modulus(apply_activation(Activation::complex_tanh(), near_pole)) >= 1e3);
  CHECK(cauchy_riemann_residual([](Complex z) { return apply_activation(Activation::complex_tanh(), z); },
                                {0.3, 0.4}) <= 1e-6);
}

TEST_CASE("holomorphy classification") {
  CHECK(is_holomorphic(Activation::complex_tanh()));
  CHECK(is_holomorphic(Activation::identity()));
  CHECK_FALSE(is_holomorphic(Activation::crelu()));
  CHECK_FALSE(is_holomorphic(Activation::cardioid()));
  CHECK(is_mvn(Activation::mvn_discrete(2)));
  CHECK_FALSE(is_mvn(Activation::zrelu()));
}

TEST_CASE("activation names round trip") {
  for (const Activation& a : differentiable_kinds()) {
    CHECK(parse_activation(to_string(a)) == a);
  }
  CHECK(parse_activation(to_string(Activation::mvn_discrete(7))) == Activation::mvn_discrete(7));
  CHECK(to_string(Activation::modrelu(-1.0)) == "modrelu(b=-1.0)");
  CHECK(parse_activation("tanh") == Activation::complex_tanh());
  CHECK(parse_activation("type_b(tanh,identity)") == Activation::type_b(RealFn::Tanh, RealFn::Identity));
}

TEST_CASE("output maps") {
  const std::vector<Complex> a{{3, 4}};
  CHECK(output_map(OutputMap::Abs, a) == std::vector<double>{5.0});
  const std::vector<Complex> b{{2, 2}};
  CHECK(output_map(OutputMap::SqDiff, b) == std::vector<double>{0.0});
  const std::vector<Complex> zeros{0.0, 0.0};
  CHECK(output_map(OutputMap::SoftmaxAbs, zeros) == std::vector<double>{0.5, 0.5});
  const std::vector<Complex> c{{1, 3}, {0, 0}};
  const auto avg = output_map(OutputMap::SoftmaxAvg, c);
  CHECK(avg[0] == doctest::Approx(std::exp(2.0) / (std::exp(2.0) + 1.0)));
  const std::vector<double> labels{0.0, 2.5};
  const ComplexVector cast = cast_labels(labels);
  CHECK(cast[1] == Complex(2.5, 2.5));
  CHECK(output_map(OutputMap::CastLabels, cast) == labels);
  for (OutputMap m : {OutputMap::Abs, OutputMap::SqDiff, OutputMap::SoftmaxAbs, OutputMap::SoftmaxAvg,
                      OutputMap::CastLabels}) {
    CHECK(parse_output_map(to_string(m)) == m);
  }
  CHECK_THROWS_AS(parse_output_map("max"), InvalidArgument);
}

TEST_CASE("softmax is stable and normalised") {
  const std::vector<double> x{1000.0, 1000.0, -1000.0};
  const auto s = softmax(x);
  CHECK(s[0] == doctest::Approx(0.5));
  CHECK(s[2] >= 0.0);
  CHECK(s[0] + s[1] + s[2] == doctest::Approx(1.0));
}
