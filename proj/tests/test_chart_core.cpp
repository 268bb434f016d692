#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <vector>

#include "igcurv/chart.hpp"
#include "igcurv/types.hpp"

using namespace igcurv;

namespace {

Box unit_box2() {
  Box b;
  b.lo = {-1.0, -1.0};
  b.hi = {1.0, 1.0};
  return b;
}

ChartField scalar_rank0_field(const Box& box, std::function<double(const ChartPoint&)> f) {
  ChartField cf;
  cf.dim = box.dim();
  cf.rank = 0;
  cf.domain = box;
  cf.eval = [f](const ChartPoint& p) { return Tensor::scalar(f(p)); };
  return cf;
}

}  // namespace

TEST_CASE("tensor construction enforces rank and dimension bounds") {
  CHECK_THROWS_AS(Tensor(5, 2), DimensionMismatch);
  CHECK_THROWS_AS(Tensor(-1, 2), DimensionMismatch);
  CHECK_THROWS_AS(Tensor(2, 1), DimensionMismatch);
  CHECK_THROWS_AS(Tensor(2, 5), DimensionMismatch);
  CHECK_NOTHROW(Tensor(4, 4));
  CHECK_NOTHROW(Tensor(0, 0));  // rank 0 ignores dim
}

TEST_CASE("tensor storage is row-major and zero-initialized") {
  Tensor t(3, 2);
  CHECK(t.max_abs() == 0.0);
  t(1, 0, 1) = 7.0;
  // Row-major offset (1*2+0)*2+1 = 5.
  CHECK(t.data()[5] == 7.0);
  CHECK(t(1, 0, 1) == 7.0);
}

TEST_CASE("tensor arithmetic is shape-checked and elementwise") {
  Tensor a(2, 2), b(2, 2);
  a(0, 1) = 2.0;
  b(0, 1) = 3.0;
  Tensor c = a + b;
  CHECK(c(0, 1) == 5.0);
  c -= a;
  CHECK(c(0, 1) == 3.0);
  Tensor d = 2.0 * c;
  CHECK(d(0, 1) == 6.0);

  Tensor wrong(2, 3);
  CHECK_THROWS_AS(a += wrong, DimensionMismatch);
}

TEST_CASE("scalar tensors hold one value") {
  Tensor s = Tensor::scalar(-4.25);
  CHECK(s.rank() == 0);
  CHECK(s() == -4.25);
  CHECK(s.max_abs() == 4.25);
}

TEST_CASE("variance tags are stored per slot") {
  Tensor t(3, 2, kConn);
  CHECK(t.variance(0) == Variance::upper);
  CHECK(t.variance(1) == Variance::lower);
  t.set_variance(0, Variance::lower);
  CHECK(t.variance(0) == Variance::lower);
}

TEST_CASE("relative_residual floors tiny absolute residuals") {
  // Below the 1e-12 absolute floor the raw residual is reported.
  CHECK(relative_residual(5e-13, 1e-30) == 5e-13);
  // Above the floor the scale divides, itself floored at 1e-12.
  CHECK(relative_residual(1e-6, 2.0) == doctest::Approx(5e-7));
  CHECK(relative_residual(1e-6, 0.0) == doctest::Approx(1e-6 / 1e-12));
}

TEST_CASE("box membership and unit-cube mapping with inset") {
  Box b = unit_box2();
  CHECK(b.contains({0.0, 0.0}));
  CHECK(!b.contains({1.5, 0.0}));
  ChartPoint center = b.from_unit({0.5, 0.5}, 0.05);
  CHECK(center[0] == doctest::Approx(0.0));
  // u = 0 maps to lo + inset·width.
  ChartPoint corner = b.from_unit({0.0, 0.0}, 0.05);
  CHECK(corner[0] == doctest::Approx(-0.9));
  CHECK(corner[1] == doctest::Approx(-0.9));
}

TEST_CASE("fd step scales with the coordinate magnitude") {
  CHECK(fd_step_for(1e-4, 0.3) == doctest::Approx(1e-4));
  CHECK(fd_step_for(1e-4, -2.5) == doctest::Approx(2.5e-4));
  // base 0 selects the process default.
  CHECK(fd_step_for(0.0, 0.0) == doctest::Approx(default_fd_base()));
}

TEST_CASE("central differences are exact on quadratics and O(h^2) on cubics") {
  Box b = unit_box2();
  ChartField f = scalar_rank0_field(b, [](const ChartPoint& p) {
    return p[0] * p[0] * p[1];  // quadratic in x0
  });
  const ChartPoint p = {0.3, -0.4};
  Tensor d0 = partial_derivative(f, p, 0);
  CHECK(d0() == doctest::Approx(2.0 * 0.3 * -0.4).epsilon(1e-12));

  ChartField cubic = scalar_rank0_field(b, [](const ChartPoint& p2) {
    return p2[0] * p2[0] * p2[0];
  });
  Tensor d1 = partial_derivative(cubic, p, 0);
  // Central difference of x^3 is 3x^2 + h^2; h = 1e-4 here.
  CHECK(std::abs(d1() - 3.0 * 0.3 * 0.3) == doctest::Approx(1e-8).epsilon(0.1));
}

TEST_CASE("second partials of a bilinear field are exact and symmetric") {
  Box b = unit_box2();
  ChartField f = scalar_rank0_field(b, [](const ChartPoint& p) {
    return 2.0 * p[0] * p[1] + p[1] * p[1];
  });
  const ChartPoint p = {0.1, 0.2};
  Tensor dxy = second_partial(f, p, 0, 1);
  Tensor dyx = second_partial(f, p, 1, 0);
  CHECK(dxy() == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(dyx() == doctest::Approx(2.0).epsilon(1e-9));
  Tensor dyy = second_partial(f, p, 1, 1);
  CHECK(dyy() == doctest::Approx(2.0).epsilon(1e-9));
}

TEST_CASE("stencil points escaping the domain raise DomainEscape") {
  Box b = unit_box2();
  ChartField f = scalar_rank0_field(b, [](const ChartPoint& p) { return p[0]; });
  CHECK_THROWS_AS(partial_derivative(f, {1.0, 0.0}, 0), DomainEscape);
  CHECK_NOTHROW(partial_derivative(f, {0.0, 0.0}, 0));
}

TEST_CASE("metric_from_components inverts, classifies, and validates") {
  Tensor g(2, 2);
  g(0, 0) = 2.0;
  g(1, 1) = 0.5;
  MetricAtPoint m = metric_from_components(g);
  CHECK(m.det_g == doctest::Approx(1.0));
  CHECK(m.sqrt_abs_det == doctest::Approx(1.0));
  CHECK(m.g_inv(0, 0) == doctest::Approx(0.5));
  CHECK(m.g_inv(1, 1) == doctest::Approx(2.0));
  CHECK(m.signature == std::vector<int>{1, 1});

  Tensor lorentz(2, 2);
  lorentz(0, 0) = -1.0;
  lorentz(1, 1) = 1.0;
  MetricAtPoint ml = metric_from_components(lorentz);
  CHECK(ml.det_g == doctest::Approx(-1.0));
  CHECK(ml.sqrt_abs_det == doctest::Approx(1.0));
  // Signature signs ordered by descending eigenvalue.
  CHECK(ml.signature == std::vector<int>{1, -1});

  Tensor sing(2, 2);  // rank deficient
  sing(0, 0) = 1.0;
  CHECK_THROWS_AS(metric_from_components(sing), SingularMetric);

  Tensor asym(2, 2);
  asym(0, 0) = 1.0;
  asym(1, 1) = 1.0;
  asym(0, 1) = 0.3;
  asym(1, 0) = 0.1;
  CHECK_THROWS_AS(metric_from_components(asym), AsymmetricMetric);
}

TEST_CASE("g·g_inv recovers the identity for a full random-looking metric") {
  Tensor g(3, 3);
  g(0, 0) = 2.0; g(1, 1) = 3.0; g(2, 2) = 1.5;
  g(0, 1) = g(1, 0) = 0.4;
  g(0, 2) = g(2, 0) = -0.2;
  g(1, 2) = g(2, 1) = 0.1;
  MetricAtPoint m = metric_from_components(g);
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      double s = 0.0;
      for (int k = 0; k < 3; ++k) s += g(i, k) * m.g_inv(k, j);
      CHECK(s == doctest::Approx(i == j ? 1.0 : 0.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("log-volume gradient routes agree on the polar-plane metric") {
  // g = diag(1, (x0)^2) on x0 in [0.2, 2]: d log sqrt|g| = (1/x0, 0).
  Box b;
  b.lo = {0.2, -1.0};
  b.hi = {2.0, 1.0};
  ChartField g;
  g.dim = 2;
  g.rank = 2;
  g.domain = b;
  g.eval = [](const ChartPoint& p) {
    Tensor t(2, 2);
    t(0, 0) = 1.0;
    t(1, 1) = p[0] * p[0];
    return t;
  };
  const ChartPoint p = {0.7, 0.1};
  Tensor grad = log_sqrt_det_gradient(g, p);
  Tensor grad_direct = log_sqrt_det_gradient_direct(g, p);
  CHECK(grad(0) == doctest::Approx(1.0 / 0.7).epsilon(1e-8));
  CHECK(std::abs(grad(1)) < 1e-10);
  CHECK(grad_direct(0) == doctest::Approx(1.0 / 0.7).epsilon(1e-7));
  CHECK(std::abs(grad(0) - grad_direct(0)) < 1e-7);
}

TEST_CASE("halton points are deterministic, inset, and match frozen values") {
  Box b = unit_box2();
  auto pts = halton_points(b, 8);
  auto pts2 = halton_points(b, 8);
  REQUIRE(pts.size() == 8);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    CHECK(pts[i] == pts2[i]);  // bitwise deterministic
    CHECK(b.contains(pts[i]));
    CHECK(std::abs(pts[i][0]) <= 0.9 + 1e-15);
    CHECK(std::abs(pts[i][1]) <= 0.9 + 1e-15);
  }
  // First three points of the base-2/3 sequence on [-1,1]^2 with inset 0.05.
  CHECK(pts[0][0] == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(pts[0][1] == doctest::Approx(-0.3).epsilon(1e-14));
  CHECK(pts[1][0] == doctest::Approx(-0.45).epsilon(1e-14));
  CHECK(pts[1][1] == doctest::Approx(0.3).epsilon(1e-14));
  CHECK(pts[2][0] == doctest::Approx(0.45).epsilon(1e-14));
  CHECK(pts[2][1] == doctest::Approx(-0.7).epsilon(1e-14));
}

TEST_CASE("halton points use distinct prime bases per axis up to dim 4") {
  Box b;
  b.lo = {0.0, 0.0, 0.0, 0.0};
  b.hi = {1.0, 1.0, 1.0, 1.0};
  auto pts = halton_points(b, 16, 0.0);
  // Base 5 (third axis) first value 1/5; base 7 (fourth axis) first value 1/7.
  CHECK(pts[0][2] == doctest::Approx(0.2).epsilon(1e-14));
  CHECK(pts[0][3] == doctest::Approx(1.0 / 7.0).epsilon(1e-14));
  // All coordinates distinct across the first few points on each axis.
  for (int axis = 0; axis < 4; ++axis) {
    CHECK(pts[0][axis] != pts[1][axis]);
    CHECK(pts[1][axis] != pts[2][axis]);
  }
}

TEST_CASE("per-field fd_step override is honored by derivatives") {
  Box b = unit_box2();
  ChartField f = scalar_rank0_field(b, [](const ChartPoint& p) {
    return p[0] * p[0] * p[0] * p[0];  // x^4: central diff error 4 x h^2 ... visible
  });
  f.fd_step = 1e-2;
  const ChartPoint p = {0.5, 0.0};
  // With h = 1e-2: d/dx x^4 = 4x^3 + 4x h^2 + O(h^4) -> error about 2e-4.
  Tensor d = partial_derivative(f, p, 0);
  const double err_big = std::abs(d() - 4.0 * 0.125);
  CHECK(err_big > 1e-5);
  // Explicit base overrides the field's step.
  Tensor d_small = partial_derivative(f, p, 0, 1e-4);
  const double err_small = std::abs(d_small() - 4.0 * 0.125);
  CHECK(err_small < 1e-7);
}
