// Frozen reference checks for the curvature-decomposition family, evaluated
// on random integer jets (all arithmetic below is exact in double precision,
// so the expected residual of every identity is literally zero, except where
// a metric inverse introduces rounding).
//
// These tests pin the sign and slot conventions: if an implementation
// change ever disagrees with them, the implementation is wrong.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "oracle_support.hpp"

using igcurv::Tensor;

namespace {

// Elementwise a + s*b.
Tensor axpy(const Tensor& a, double s, const Tensor& b) {
  Tensor out = a;
  for (std::size_t i = 0; i < out.data().size(); ++i) out.data()[i] += s * b.data()[i];
  return out;
}

struct JetPair {
  int n;
  Tensor G, dG, K, dK, Gs, dGs, G0, dG0;
  Tensor R, Rs, R0, T, Ts, T0, DK, DK0, KK, TK, T0K;
};

JetPair make_jets(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  JetPair j;
  j.n = n;
  j.G = oracle::random_int_tensor(3, n, rng);
  j.dG = oracle::random_int_tensor(4, n, rng);
  j.K = oracle::random_int_tensor(3, n, rng);
  j.dK = oracle::random_int_tensor(4, n, rng);
  j.Gs = axpy(j.G, 1.0, j.K);
  j.dGs = axpy(j.dG, 1.0, j.dK);
  j.G0 = axpy(j.G, 0.5, j.K);
  j.dG0 = axpy(j.dG, 0.5, j.dK);
  j.R = oracle::riemann(j.G, j.dG);
  j.Rs = oracle::riemann(j.Gs, j.dGs);
  j.R0 = oracle::riemann(j.G0, j.dG0);
  j.T = oracle::torsion(j.G);
  j.Ts = oracle::torsion(j.Gs);
  j.T0 = oracle::torsion(j.G0);
  j.DK = oracle::cov12(j.G, j.K, j.dK);
  j.DK0 = oracle::cov12(j.G0, j.K, j.dK);
  j.KK = oracle::kk(j.K);
  j.TK = oracle::tk(j.T, j.K);
  j.T0K = oracle::tk(j.T0, j.K);
  return j;
}

double skew(const Tensor& D, int k, int m, int j, int i) {
  return D(k, m, i, j) - D(k, m, j, i);
}

}  // namespace

TEST_CASE("curvature split: average-connection forms are exact") {
  for (int n : {2, 3}) {
    auto j = make_jets(n, 42 + static_cast<std::uint64_t>(n));
    double w1 = 0, w2 = 0, w3 = 0, w4 = 0;
    for (int m = 0; m < n; ++m)
      for (int k = 0; k < n; ++k)
        for (int x = 0; x < n; ++x)
          for (int i = 0; i < n; ++i) {
            const double r = j.R(m, k, x, i), rs = j.Rs(m, k, x, i), r0 = j.R0(m, k, x, i);
            const double sk0 = skew(j.DK0, k, m, x, i);
            const double kk = j.KK(k, m, x, i), t0k = j.T0K(k, m, x, i);
            w1 = std::max(w1, std::abs(r - (r0 - 0.5 * sk0 + 0.25 * kk - 0.5 * t0k)));
            w2 = std::max(w2, std::abs(rs - (r0 + 0.5 * sk0 + 0.25 * kk + 0.5 * t0k)));
            w3 = std::max(w3, std::abs((r - rs) - (-sk0 - t0k)));
            w4 = std::max(w4, std::abs((r + rs) - (2.0 * r0 + 0.5 * kk)));
          }
    CHECK(w1 == 0.0);
    CHECK(w2 == 0.0);
    CHECK(w3 == 0.0);
    CHECK(w4 == 0.0);
  }
}

TEST_CASE("curvature split: primal-connection forms are exact") {
  for (int n : {2, 3}) {
    auto j = make_jets(n, 7 + static_cast<std::uint64_t>(n));
    double w1 = 0, w2 = 0, w3 = 0;
    for (int m = 0; m < n; ++m)
      for (int k = 0; k < n; ++k)
        for (int x = 0; x < n; ++x)
          for (int i = 0; i < n; ++i) {
            const double r = j.R(m, k, x, i), rs = j.Rs(m, k, x, i), r0 = j.R0(m, k, x, i);
            const double sk = skew(j.DK, k, m, x, i);
            const double kk = j.KK(k, m, x, i), tkv = j.TK(k, m, x, i);
            w1 = std::max(w1, std::abs(r - (r0 - 0.5 * sk - 0.25 * kk - 0.5 * tkv)));
            w2 = std::max(w2, std::abs(rs - (r0 + 0.5 * sk + 0.75 * kk + 0.5 * tkv)));
            w3 = std::max(w3, std::abs((r - rs) - (-sk - kk - tkv)));
          }
    CHECK(w1 == 0.0);
    CHECK(w2 == 0.0);
    CHECK(w3 == 0.0);
  }
}

TEST_CASE("curvature split: Ricci-level contractions match their statements") {
  for (int n : {2, 3}) {
    auto j = make_jets(n, 100 + static_cast<std::uint64_t>(n));
    const Tensor Ric = oracle::ricci(j.R);
    const Tensor Ric0 = oracle::ricci(j.R0);
    const Tensor tr1 = oracle::trace_right(j.K);
    double worst = 0.0;
    for (int m = 0; m < n; ++m)
      for (int i = 0; i < n; ++i) {
        // Contraction (value slot against first direction) of the exact
        // rank-4 split, stated directly at the Ricci level:
        double div0 = 0.0, dtr = 0.0, kq1 = 0.0, kq2 = 0.0, tq = 0.0;
        for (int a = 0; a < n; ++a) {
          div0 += j.DK0(a, m, i, a);   // (Div⁰K)_mi
          dtr += j.DK0(a, m, a, i);    // ∇⁰_i (Tr1 K)_m
          for (int l = 0; l < n; ++l) {
            kq2 += j.K(l, m, a) * j.K(a, l, i);
            tq += j.T0(l, a, i) * j.K(a, m, l);
          }
        }
        for (int l = 0; l < n; ++l) kq1 += j.K(l, m, i) * tr1(l);
        const double rhs = Ric0(m, i) - 0.5 * (div0 - dtr) + 0.25 * (kq1 - kq2) - 0.5 * tq;
        worst = std::max(worst, std::abs(Ric(m, i) - rhs));
      }
    CHECK(worst == 0.0);
  }
}

TEST_CASE("alpha blend: curvature of a blended connection") {
  for (int n : {2, 3}) {
    auto j = make_jets(n, 11 + static_cast<std::uint64_t>(n));
    // a + b = 1; a=2, b=-1 keeps everything integral.
    for (double a : {2.0, 0.5}) {
      const double b = 1.0 - a;
      Tensor Ga = axpy(Tensor(3, j.G.dim()), a, j.G);
      Ga = axpy(Ga, b, j.Gs);
      Tensor dGa = axpy(Tensor(4, j.G.dim()), a, j.dG);
      dGa = axpy(dGa, b, j.dGs);
      const Tensor Ra = oracle::riemann(Ga, dGa);
      double worst = 0.0;
      for (int m = 0; m < n; ++m)
        for (int k = 0; k < n; ++k)
          for (int x = 0; x < n; ++x)
            for (int i = 0; i < n; ++i)
              worst = std::max(worst,
                               std::abs(Ra(m, k, x, i) - (a * j.R(m, k, x, i) +
                                                          b * j.Rs(m, k, x, i) -
                                                          a * b * j.KK(k, m, x, i))));
      CHECK(worst == 0.0);

      // Ricci level with the quadratic-correction tensor
      // Kcal[l][j] = -Σ_a KK[a][l][a][j].
      const Tensor Rica = oracle::ricci(Ra);
      const Tensor Ric = oracle::ricci(j.R);
      const Tensor Rics = oracle::ricci(j.Rs);
      double worst2 = 0.0;
      for (int m = 0; m < n; ++m)
        for (int i = 0; i < n; ++i) {
          double kcal = 0.0;
          for (int q = 0; q < n; ++q) kcal -= j.KK(q, m, q, i);
          worst2 = std::max(worst2, std::abs(Rica(m, i) - (a * Ric(m, i) + b * Rics(m, i) +
                                                           a * b * kcal)));
        }
      CHECK(worst2 == 0.0);
    }
  }
}

TEST_CASE("cyclic torsion-curvature identity is exact in jets") {
  for (int n : {2, 3}) {
    auto j = make_jets(n, 23 + static_cast<std::uint64_t>(n));
    CHECK(oracle::bianchi_cyclic_residual(j.G, j.dG, j.T, j.R) == 0.0);
    CHECK(oracle::bianchi_cyclic_residual(j.Gs, j.dGs, j.Ts, j.Rs) == 0.0);
  }
}

TEST_CASE("Ricci antisymmetry through torsion divergence and connection trace") {
  for (int n : {2, 3}) {
    auto j = make_jets(n, 55 + static_cast<std::uint64_t>(n));
    const Tensor Ric = oracle::ricci(j.R);
    const Tensor dT = oracle::torsion_derivative(j.dG);
    double worst = 0.0;
    for (int i = 0; i < n; ++i)
      for (int x = 0; x < n; ++x) {
        double rhs = 0.0;
        for (int k = 0; k < n; ++k) {
          rhs += oracle::covT(j.G, j.T, dT, k, x, i, k);  // Σ_k (∇_k T)(∂_x,∂_i)^k
          rhs += j.dG(k, x, k, i) - j.dG(k, i, k, x);
        }
        worst = std::max(worst, std::abs((Ric(i, x) - Ric(x, i)) - rhs));
      }
    CHECK(worst == 0.0);
  }
}

TEST_CASE("first-pair curvature trace identity is exact in jets") {
  for (int n : {2, 3}) {
    auto j = make_jets(n, 71 + static_cast<std::uint64_t>(n));
    const Tensor Ric = oracle::ricci(j.R);
    const Tensor dT = oracle::torsion_derivative(j.dG);
    double worst = 0.0;
    for (int x = 0; x < n; ++x)
      for (int k = 0; k < n; ++k) {
        double lhs = Ric(k, x) - Ric(x, k);
        for (int i = 0; i < n; ++i) lhs += j.R(i, i, x, k);
        // Torsion quadratics plus the three divergence-style terms
        // Σ_i [ DT[i][x][k][i] + DT[i][k][i][x] + DT[i][i][x][k] ],
        // where DT[k][a][b][x] = (∇_x T)(∂_a,∂_b)^k.
        double rhs = 0.0;
        for (int m = 0; m < n; ++m)
          for (int i = 0; i < n; ++i)
            rhs += j.T(m, i, x) * j.T(i, m, k) + j.T(m, x, k) * j.T(i, m, i) +
                   j.T(m, k, i) * j.T(i, m, x);
        for (int i = 0; i < n; ++i)
          rhs += oracle::covT(j.G, j.T, dT, i, x, k, i) +
                 oracle::covT(j.G, j.T, dT, x, k, i, i) +
                 oracle::covT(j.G, j.T, dT, k, i, x, i);
        worst = std::max(worst, std::abs(lhs - rhs));
      }
    CHECK(worst == 0.0);
  }
}

TEST_CASE("metric-dual jet: exchange, anti-nonmetricity, involution, volume trace") {
  for (int n : {2, 3}) {
    std::mt19937_64 rng(900 + static_cast<std::uint64_t>(n));
    std::uniform_int_distribution<int> d(-2, 2);
    const int N = n;
    Tensor g(2, N);
    for (int i = 0; i < N; ++i)
      for (int k = i; k < N; ++k) {
        double v = d(rng) + (i == k ? 7.0 : 0.0);
        g(i, k) = v;
        g(k, i) = v;
      }
    Tensor dg(3, N);
    for (int k = 0; k < N; ++k)
      for (int i = 0; i < N; ++i)
        for (int x = i; x < N; ++x) {
          double v = d(rng);
          dg(k, i, x) = v;
          dg(k, x, i) = v;
        }
    Tensor d2g(4, N);
    for (int x = 0; x < N; ++x)
      for (int k = x; k < N; ++k)
        for (int i = 0; i < N; ++i)
          for (int q = i; q < N; ++q) {
            double v = d(rng);
            d2g(x, k, i, q) = v;
            d2g(x, k, q, i) = v;
            d2g(k, x, i, q) = v;
            d2g(k, x, q, i) = v;
          }
    std::mt19937_64 rng2(901 + static_cast<std::uint64_t>(n));
    Tensor G = oracle::random_int_tensor(3, N, rng2);
    Tensor dG = oracle::random_int_tensor(4, N, rng2);

    // Exact inverse via adjugate-free Gaussian elimination on doubles is not
    // exact; tolerate rounding at 1e-12 of scale below.
    Tensor ginv(2, N, igcurv::kAllUpper);
    {
      // Gauss-Jordan
      std::vector<std::vector<double>> a(N, std::vector<double>(2 * N, 0.0));
      for (int i = 0; i < N; ++i) {
        for (int q = 0; q < N; ++q) a[i][q] = g(i, q);
        a[i][N + i] = 1.0;
      }
      for (int col = 0; col < N; ++col) {
        int piv = col;
        for (int r = col; r < N; ++r)
          if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
        std::swap(a[col], a[piv]);
        const double pv = a[col][col];
        for (double& v : a[col]) v /= pv;
        for (int r = 0; r < N; ++r)
          if (r != col) {
            const double f = a[r][col];
            for (int q = 0; q < 2 * N; ++q) a[r][q] -= f * a[col][q];
          }
      }
      for (int i = 0; i < N; ++i)
        for (int q = 0; q < N; ++q) ginv(i, q) = a[i][N + q];
    }

    const Tensor C = oracle::nonmetricity(g, dg, G);
    const Tensor Gd = oracle::dual(ginv, G, C);
    const Tensor dGd = oracle::dual_derivative(g, ginv, dg, d2g, G, dG, Gd);
    const Tensor R = oracle::riemann(G, dG);
    const Tensor Rd = oracle::riemann(Gd, dGd);
    const Tensor RC = oracle::lowered(g, R);
    const Tensor RCd = oracle::lowered(g, Rd);

    const double scale = std::max(1.0, std::max(RC.max_abs(), RCd.max_abs()));
    double worst = 0.0;
    for (int w = 0; w < N; ++w)
      for (int z = 0; z < N; ++z)
        for (int x = 0; x < N; ++x)
          for (int y = 0; y < N; ++y)
            worst = std::max(worst, std::abs(RC(w, z, x, y) + RCd(z, w, x, y)));
    CHECK(worst / scale < 1e-12);

    // C* = -C.
    const Tensor Cd = oracle::nonmetricity(g, dg, Gd);
    double worstC = 0.0;
    for (int k = 0; k < N; ++k)
      for (int i = 0; i < N; ++i)
        for (int q = 0; q < N; ++q) worstC = std::max(worstC, std::abs(Cd(k, i, q) + C(k, i, q)));
    CHECK(worstC / std::max(1.0, C.max_abs()) < 1e-12);

    // dual(dual) = id.
    const Tensor Gdd = oracle::dual(ginv, Gd, Cd);
    double worstI = 0.0;
    for (int l = 0; l < N; ++l)
      for (int i = 0; i < N; ++i)
        for (int q = 0; q < N; ++q) worstI = std::max(worstI, std::abs(Gdd(l, i, q) - G(l, i, q)));
    CHECK(worstI / std::max(1.0, G.max_abs()) < 1e-12);

    // Tr2(Γ) + Tr2(Γ*) = Σ g^{pq} ∂_k g_pq.
    for (int k = 0; k < N; ++k) {
      double lhs = 0.0, rhs = 0.0;
      for (int m = 0; m < N; ++m) lhs += G(m, m, k) + Gd(m, m, k);
      for (int p = 0; p < N; ++p)
        for (int q = 0; q < N; ++q) rhs += ginv(p, q) * dg(k, p, q);
      CHECK(std::abs(lhs - rhs) < 1e-11 * std::max(1.0, std::abs(rhs)));
    }

    // Levi-Civita nonmetricity vanishes as a polynomial identity.
    const Tensor lc = oracle::levi_civita(ginv, dg);
    const Tensor Clc = oracle::nonmetricity(g, dg, lc);
    CHECK(Clc.max_abs() / std::max(1.0, dg.max_abs()) < 1e-12);
  }
}

TEST_CASE("trace example: K^k_ij = delta^k_i v_j") {
  const int n = 2;
  Tensor K(3, n);
  const double v0 = 0.3, v1 = -0.7;
  // K[k][i][j] = δ^k_i v_j.
  K(0, 0, 0) = v0;
  K(0, 0, 1) = v1;
  K(1, 1, 0) = v0;
  K(1, 1, 1) = v1;
  const Tensor tr1 = oracle::trace_right(K);
  const Tensor tr2 = oracle::trace_left(K);
  CHECK(tr1(0) == doctest::Approx(v0));
  CHECK(tr1(1) == doctest::Approx(v1));
  CHECK(tr2(0) == doctest::Approx(2.0 * v0));
  CHECK(tr2(1) == doctest::Approx(2.0 * v1));
}

TEST_CASE("effective stress-energy round trip (scalar model)") {
  // With a = (1+α)/2, b = (1-α)/2 and G^α = aG + bG* + abH:
  //   κ·T_eff(T = G^α/κ) = (2/(1+α))G^α − ((1-α)/(1+α))G* − ((1-α)/2)H = G.
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int trial = 0; trial < 100; ++trial) {
    const double Gv = u(rng), Gs = u(rng), H = u(rng);
    double alpha = u(rng);
    if (std::abs(1.0 + alpha) < 0.2) alpha = 0.5;
    const double kappa = 0.5 + std::abs(u(rng));
    const double a = 0.5 * (1.0 + alpha), b = 0.5 * (1.0 - alpha);
    const double Galpha = a * Gv + b * Gs + a * b * H;
    const double T = Galpha / kappa;
    const double Teff = (2.0 / (1.0 + alpha)) * T -
                        (1.0 / kappa) * (((1.0 - alpha) / (1.0 + alpha)) * Gs +
                                         0.5 * (1.0 - alpha) * H);
    CHECK(kappa * Teff == doctest::Approx(Gv).epsilon(1e-12));
  }
  // Pinned spot value: α=0, κ=1, G=1, G*=2, H=4 ⇒ G^0 = 2.5, T_eff = 1.
  const double Galpha0 = 0.5 * 1.0 + 0.5 * 2.0 + 0.25 * 4.0;
  CHECK(Galpha0 == doctest::Approx(2.5));
  const double Teff0 = 2.0 * 2.5 - (1.0 * 2.0 + 0.5 * 4.0);
  CHECK(Teff0 == doctest::Approx(1.0));
}

TEST_CASE("alpha-divergence blend coefficients (scalar model)") {
  // ∇^α = a∇ + b∇*, G^α = aG + bG* + abH  ⇒
  // ∇^α G^α = a²(∇G) + ab(∇G*) + a²b(∇H) + ab(∇*G) + b²(∇*G*) + ab²(∇*H).
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int trial = 0; trial < 100; ++trial) {
    const double dG = u(rng), dGs = u(rng), dsG = u(rng), dsGs = u(rng);
    const double dH = u(rng), dsH = u(rng);
    const double alpha = u(rng);
    const double a = 0.5 * (1.0 + alpha), b = 0.5 * (1.0 - alpha);
    // "Derivative" acts linearly; model ∇X and ∇*X by independent numbers.
    const double lhs = a * (a * dG + b * dGs + a * b * dH) +
                       b * (a * dsG + b * dsGs + a * b * dsH);
    const double rhs = a * a * dG + a * b * (dsG + dGs) + b * b * dsGs +
                       a * b * (a * dH + b * dsH);
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
    // At α = 0 the H-terms carry coefficient 1/8 each, not 1/4.
    if (trial == 0) {
      const double a0 = 0.5, b0 = 0.5;
      CHECK(a0 * b0 * a0 == doctest::Approx(0.125));
      CHECK(a0 * b0 * b0 == doctest::Approx(0.125));
    }
  }
}
