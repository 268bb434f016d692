// Closed-form reference values, all derived by hand (or classical results),
// frozen before the implementations they constrain. Covers the built-in
// geometry families, quadrature, quasi-random sampling, and the
// finite-difference kernels.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "igcurv/curvature.hpp"
#include "igcurv/zoo.hpp"

using namespace igcurv;

namespace {

ChartField scalar_field(int dim, Box box, std::function<double(const ChartPoint&)> f) {
  ChartField field;
  field.dim = dim;
  field.rank = 0;
  field.domain = std::move(box);
  field.eval = [f = std::move(f)](const ChartPoint& p) { return Tensor::scalar(f(p)); };
  return field;
}

Box cube(int dim, double lo, double hi) {
  Box b;
  b.lo.assign(static_cast<std::size_t>(dim), lo);
  b.hi.assign(static_cast<std::size_t>(dim), hi);
  return b;
}

}  // namespace

TEST_CASE("halton points: frozen values, bases 2/3/5/7, 5% inset") {
  const auto pts2 = halton_points(cube(2, -1.0, 1.0), 3);
  REQUIRE(pts2.size() == 3);
  // u = (1/2, 1/3), (1/4, 2/3), (3/4, 1/9); x = -1 + 2(0.05 + 0.9u).
  CHECK(pts2[0][0] == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(pts2[0][1] == doctest::Approx(-0.3).epsilon(1e-12));
  CHECK(pts2[1][0] == doctest::Approx(-0.45).epsilon(1e-12));
  CHECK(pts2[1][1] == doctest::Approx(0.3).epsilon(1e-12));
  CHECK(pts2[2][0] == doctest::Approx(0.45).epsilon(1e-12));
  CHECK(pts2[2][1] == doctest::Approx(-0.7).epsilon(1e-12));

  const auto pts4 = halton_points(cube(4, -1.0, 1.0), 1);
  CHECK(pts4[0][2] == doctest::Approx(-0.54).epsilon(1e-12));           // base 5: 1/5
  CHECK(pts4[0][3] == doctest::Approx(-1.0 + 2.0 * (0.05 + 0.9 / 7.0)));  // base 7: 1/7

  // Determinism and domain containment.
  const auto again = halton_points(cube(2, -1.0, 1.0), 3);
  for (int i = 0; i < 3; ++i) {
    CHECK(pts2[static_cast<std::size_t>(i)] == again[static_cast<std::size_t>(i)]);
  }
  const Box b = cube(2, -1.0, 1.0);
  for (const auto& p : halton_points(b, 50)) CHECK(b.contains(p));
}

TEST_CASE("central differences: accuracy and second-order convergence") {
  auto f = scalar_field(1 + 1, cube(2, -4.0, 4.0),
                        [](const ChartPoint& p) { return std::sin(p[0]) * std::cos(p[1]); });

  const ChartPoint p{0.3, 0.0};
  const double exact = std::cos(0.3);  // cos(y)=1 at y=0
  const Tensor d = partial_derivative(f, p, 0);
  CHECK(d() == doctest::Approx(exact).epsilon(1e-7));

  // Halving the step divides the truncation error by ~4.
  const double e1 = std::abs(partial_derivative(f, p, 0, 1e-2)() - exact);
  const double e2 = std::abs(partial_derivative(f, p, 0, 5e-3)() - exact);
  CHECK(e1 / e2 > 3.5);
  CHECK(e1 / e2 < 4.5);

  // Mixed second partial: ∂x∂y sin(x)cos(y) = -cos(x)sin(y).
  const ChartPoint q{0.4, 0.2};
  const Tensor d2 = second_partial(f, q, 0, 1, 1e-3);
  CHECK(d2() == doctest::Approx(-std::cos(0.4) * std::sin(0.2)).epsilon(2e-5));
  // Pure second partial: ∂x∂x = -sin(x)cos(y).
  const Tensor d2xx = second_partial(f, q, 0, 0, 1e-3);
  CHECK(d2xx() == doctest::Approx(-std::sin(0.4) * std::cos(0.2)).epsilon(2e-5));

  // Per-axis step scaling: h = base·max(1,|x|). A stencil from a point near
  // the boundary must escape and throw.
  auto g = scalar_field(2, cube(2, -1.0, 1.0), [](const ChartPoint& pp) { return pp[0]; });
  CHECK_THROWS_AS((void)partial_derivative(g, ChartPoint{1.0, 0.0}, 0), DomainEscape);
}

TEST_CASE("polar-coordinate metric: Levi-Civita and volume gradients") {
  // g = diag(1, r²) in the chart (r, phi).
  ChartField g;
  g.dim = 2;
  g.rank = 2;
  g.domain = Box{{0.5, 0.0}, {3.0, 6.283185307179586}};
  g.eval = [](const ChartPoint& p) {
    Tensor t(2, 2);
    t(0, 0) = 1.0;
    t(1, 1) = p[0] * p[0];
    return t;
  };

  const ChartPoint p{2.0, 1.0};
  const Tensor lc = levi_civita(g, p);
  // Γ^r_{phi,phi} = -r,  Γ^phi_{r,phi} = Γ^phi_{phi,r} = 1/r.
  CHECK(lc(0, 1, 1) == doctest::Approx(-2.0).epsilon(1e-9));
  CHECK(lc(1, 0, 1) == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(lc(1, 1, 0) == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(std::abs(lc(0, 0, 0)) < 1e-9);
  CHECK(std::abs(lc(0, 0, 1)) < 1e-9);

  // d log sqrt|g| = (1/r, 0); both computation routes.
  const Tensor grad = log_sqrt_det_gradient(g, p);
  CHECK(grad(0) == doctest::Approx(0.5).epsilon(1e-8));
  CHECK(std::abs(grad(1)) < 1e-10);
  const Tensor gradd = log_sqrt_det_gradient_direct(g, p);
  CHECK(gradd(0) == doctest::Approx(0.5).epsilon(1e-7));
  CHECK(std::abs(gradd(1)) < 1e-9);
}

TEST_CASE("metric_at: determinant, inverse, signature, error paths") {
  const GeometryBundle cosmo = diagonal_cosmo();
  const ChartPoint p{0.3, 0.2, -0.1, 0.4};
  const double a = 1.0 + 0.25 * 0.3;
  const MetricAtPoint m = metric_at(cosmo.g, p);
  CHECK(m.det_g == doctest::Approx(-std::pow(a, 6.0)).epsilon(1e-12));
  CHECK(m.sqrt_abs_det == doctest::Approx(std::pow(a, 3.0)).epsilon(1e-12));
  int negatives = 0;
  for (int s : m.signature) negatives += (s < 0) ? 1 : 0;
  CHECK(negatives == 1);
  CHECK(m.g_inv(0, 0) == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(m.g_inv(1, 1) == doctest::Approx(1.0 / (a * a)).epsilon(1e-12));

  Tensor singular(2, 2);
  singular(0, 0) = 1.0;  // second row zero
  CHECK_THROWS_AS((void)metric_from_components(singular), SingularMetric);

  Tensor asym(2, 2);
  asym(0, 0) = 1.0;
  asym(1, 1) = 1.0;
  asym(0, 1) = 0.5;
  asym(1, 0) = -0.5;
  CHECK_THROWS_AS((void)metric_from_components(asym), AsymmetricMetric);
}

TEST_CASE("Gauss-Hermite rule: moments and node-count stability") {
  const double sqrt_pi = std::sqrt(std::acos(-1.0));
  const auto& r64 = gauss_hermite_rule(64);
  REQUIRE(r64.nodes.size() == 64);
  REQUIRE(r64.weights.size() == 64);

  auto moment = [](const GaussHermiteRule& r, int k) {
    double s = 0.0;
    for (std::size_t i = 0; i < r.nodes.size(); ++i)
      s += r.weights[i] * std::pow(r.nodes[i], k);
    return s;
  };
  CHECK(moment(r64, 0) == doctest::Approx(sqrt_pi).epsilon(1e-13));
  CHECK(moment(r64, 2) == doctest::Approx(sqrt_pi / 2.0).epsilon(1e-13));
  CHECK(moment(r64, 4) == doctest::Approx(0.75 * sqrt_pi).epsilon(1e-13));
  CHECK(moment(r64, 6) == doctest::Approx(15.0 / 8.0 * sqrt_pi).epsilon(1e-13));
  CHECK(std::abs(moment(r64, 1)) < 1e-13 * sqrt_pi);
  CHECK(std::abs(moment(r64, 3)) < 1e-13 * sqrt_pi);

  // Nodes ascend and pair symmetrically.
  for (std::size_t i = 1; i < 64; ++i) CHECK(r64.nodes[i] > r64.nodes[i - 1]);
  for (std::size_t i = 0; i < 64; ++i)
    CHECK(r64.nodes[i] == doctest::Approx(-r64.nodes[63 - i]).epsilon(1e-12));

  // 32- and 64-node rules agree on every moment both integrate exactly.
  // Odd moments are exactly zero and evaluate to signed-pair cancellation
  // noise, which scales with the largest even moment in the loop (~288 at
  // k = 12); the absolute scale() term must sit above that times rounding.
  const auto& r32 = gauss_hermite_rule(32);
  const double moment_scale = moment(r64, 12);
  for (int k = 0; k <= 12; ++k)
    CHECK(moment(r32, k) ==
          doctest::Approx(moment(r64, k)).epsilon(1e-12).scale(moment_scale));
}

TEST_CASE("Gaussian family: Fisher metric, cubic form, flat connection") {
  const GeometryBundle gf = gaussian_family();
  CHECK(gf.dim == 2);
  CHECK(gf.kind == BundleKind::statistical);

  const double mu = 0.3, sigma = 0.8;
  const ChartPoint p{mu, sigma};

  const Tensor g = gf.g(p);
  CHECK(g(0, 0) == doctest::Approx(1.0 / (sigma * sigma)).epsilon(1e-10));
  CHECK(g(1, 1) == doctest::Approx(2.0 / (sigma * sigma)).epsilon(1e-10));
  CHECK(std::abs(g(0, 1)) < 1e-10);
  CHECK(std::abs(g(1, 0)) < 1e-10);

  // Cubic form (nonmetricity of the primal connection):
  // C_{mu mu sigma} = 2/σ³ (all slot orders), C_{sigma sigma sigma} = 8/σ³,
  // everything else zero.
  const Tensor C = nonmetricity(gf.g, gf.nabla, p);
  const double c1 = 2.0 / std::pow(sigma, 3.0);
  const double c3 = 8.0 / std::pow(sigma, 3.0);
  CHECK(C(1, 0, 0) == doctest::Approx(c1).epsilon(1e-6));
  CHECK(C(0, 0, 1) == doctest::Approx(c1).epsilon(1e-6));
  CHECK(C(0, 1, 0) == doctest::Approx(c1).epsilon(1e-6));
  CHECK(C(1, 1, 1) == doctest::Approx(c3).epsilon(1e-6));
  CHECK(std::abs(C(0, 0, 0)) < 1e-6);
  CHECK(std::abs(C(1, 1, 0)) < 1e-6);

  // Exponential-family (flat) connection in the (mu, sigma) chart:
  // Γ^mu_{mu sigma} = Γ^mu_{sigma mu} = -2/σ, Γ^sigma_{sigma sigma} = -3/σ,
  // Γ^sigma_{mu mu} = 0, rest zero.
  const Tensor gamma = gf.nabla(p);
  CHECK(gamma(0, 0, 1) == doctest::Approx(-2.0 / sigma).epsilon(1e-6));
  CHECK(gamma(0, 1, 0) == doctest::Approx(-2.0 / sigma).epsilon(1e-6));
  CHECK(gamma(1, 1, 1) == doctest::Approx(-3.0 / sigma).epsilon(1e-6));
  CHECK(std::abs(gamma(1, 0, 0)) < 1e-6);
  CHECK(std::abs(gamma(0, 0, 0)) < 1e-6);
  CHECK(std::abs(gamma(1, 0, 1)) < 1e-6);

  // Dual (mixture) connection: Γ*^sigma_{mu mu} = 1/σ, Γ*^sigma_{sigma sigma} = 1/σ,
  // Γ*^mu_{mu sigma} = 0.
  const Tensor gs = gf.nabla_star(p);
  CHECK(gs(1, 0, 0) == doctest::Approx(1.0 / sigma).epsilon(1e-6));
  CHECK(gs(1, 1, 1) == doctest::Approx(1.0 / sigma).epsilon(1e-6));
  CHECK(std::abs(gs(0, 0, 1)) < 1e-6);

  // Dually flat: the primal curvature vanishes.
  const Tensor R = riemann(gf, Conn::primal, p);
  CHECK(R.max_abs() < 1e-6);
  const Tensor Rs = riemann(gf, Conn::dual, p);
  CHECK(Rs.max_abs() < 1e-6);

  // Fisher volume gradient: d log sqrt|g| = (0, -2/σ). The central-difference
  // truncation at the default base step h = 1e-4 is h²/6 · ∂³(σ⁻²)-driven,
  // about 4e-8 here, so the tolerance must sit just above that constant.
  const Tensor grad = log_sqrt_det_gradient(gf.g, ChartPoint{0.3, 1.0});
  CHECK(std::abs(grad(0)) < 1e-8);
  CHECK(grad(1) == doctest::Approx(-2.0).epsilon(5e-8));
}

TEST_CASE("sphere: connection coefficients and curvature") {
  const GeometryBundle s1 = sphere(1.0);
  const ChartPoint p{0.7, 1.1};

  const Tensor lc = levi_civita(s1.g, p);
  CHECK(lc(0, 1, 1) == doctest::Approx(-std::sin(0.7) * std::cos(0.7)).epsilon(1e-8));
  CHECK(lc(1, 0, 1) == doctest::Approx(std::cos(0.7) / std::sin(0.7)).epsilon(1e-8));
  CHECK(lc(1, 1, 0) == doctest::Approx(std::cos(0.7) / std::sin(0.7)).epsilon(1e-8));

  const RicciValue r = ricci(s1, Conn::levi_civita, p);
  CHECK(r.scalar == doctest::Approx(2.0).epsilon(1e-6));
  // Ric = g on the unit sphere.
  const Tensor g = s1.g(p);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      CHECK(r.ricci_sym(i, j) == doctest::Approx(g(i, j)).epsilon(1e-6));

  const RicciValue r2 = ricci(sphere(2.0), Conn::levi_civita, p);
  CHECK(r2.scalar == doctest::Approx(0.5).epsilon(1e-6));

  CHECK_THROWS_AS((void)sphere(-1.0), NonpositiveParameter);
  CHECK_THROWS_AS((void)sphere(0.0), NonpositiveParameter);
}

TEST_CASE("euclidean space: everything vanishes") {
  const GeometryBundle e3 = euclidean(3);
  const ChartPoint p{0.2, -0.4, 0.6};
  CHECK(levi_civita(e3.g, p).max_abs() < 1e-12);
  CHECK(riemann(e3, Conn::primal, p).max_abs() < 1e-12);
  CHECK(ricci(e3, Conn::average, p).scalar == doctest::Approx(0.0).epsilon(1e-12));
  CHECK_THROWS_AS((void)euclidean(5), DimensionMismatch);
  CHECK_THROWS_AS((void)euclidean(1), DimensionMismatch);
}

TEST_CASE("diagonal cosmological metric: frozen curvature values") {
  const GeometryBundle c = diagonal_cosmo();
  CHECK(c.dim == 4);
  const ChartPoint p{0.0, 0.2, -0.1, 0.3};

  // a(t) = 1 + t/4, adot = 1/4, addot = 0:
  // scalar R = 6[addot/a + (adot/a)²] = 6/16 at t=0 ⇒ 3/8.
  const RicciValue r = ricci(c, Conn::levi_civita, p);
  CHECK(r.scalar == doctest::Approx(3.0 / 8.0).epsilon(1e-6));
  CHECK(std::abs(r.ricci_sym(0, 0)) < 1e-6);  // Ric_tt = -3 addot/a = 0
  // Ric_xx = a·addot + 2 adot² = 1/8 at t=0.
  CHECK(r.ricci_sym(1, 1) == doctest::Approx(0.125).epsilon(1e-6));

  // Volume gradient d log sqrt|g| = (3 adot/a, 0, 0, 0) = (3/4, 0, 0, 0).
  const Tensor grad = log_sqrt_det_gradient(c.g, p);
  CHECK(grad(0) == doctest::Approx(0.75).epsilon(1e-8));
  CHECK(std::abs(grad(1)) < 1e-10);
}
