#include "igcurv/zoo.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

namespace igcurv {

namespace {

using nlohmann::json;

constexpr const char* kValidNameForms =
    "gaussian_family | sphere[:r] | euclidean[:n] | diagonal_cosmo | "
    "random:<kind>:<dim>:<seed> | <path to a JSON descriptor file>";

Box unit_box(int dim) {
  Box b;
  b.lo.assign(static_cast<std::size_t>(dim), -1.0);
  b.hi.assign(static_cast<std::size_t>(dim), 1.0);
  return b;
}

// ---------------------------------------------------------------------------
// Low-degree polynomials with explicit coefficients (deterministic random
// draws and analytic gradients).
// ---------------------------------------------------------------------------

struct Poly2 {
  int dim = 0;
  double c0 = 0.0;
  std::array<double, 4> c1{};                 // linear coefficients
  std::array<std::array<double, 4>, 4> c2{};  // quadratic, upper triangle a<=b

  double eval(const ChartPoint& p) const {
    double v = c0;
    for (int a = 0; a < dim; ++a) {
      v += c1[static_cast<std::size_t>(a)] * p[static_cast<std::size_t>(a)];
      for (int b = a; b < dim; ++b) {
        v += c2[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] *
             p[static_cast<std::size_t>(a)] * p[static_cast<std::size_t>(b)];
      }
    }
    return v;
  }

  double grad(const ChartPoint& p, int i) const {
    double v = c1[static_cast<std::size_t>(i)];
    for (int a = 0; a < dim; ++a) {
      for (int b = a; b < dim; ++b) {
        const double c = c2[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)];
        if (c == 0.0) continue;
        if (a == i) v += c * p[static_cast<std::size_t>(b)];
        if (b == i) v += c * p[static_cast<std::size_t>(a)];
      }
    }
    return v;
  }
};

Poly2 random_poly2(std::mt19937_64& rng, int dim, double lo, double hi,
                   bool quadratic) {
  std::uniform_real_distribution<double> u(lo, hi);
  Poly2 p;
  p.dim = dim;
  p.c0 = u(rng);
  for (int a = 0; a < dim; ++a) p.c1[static_cast<std::size_t>(a)] = u(rng);
  if (quadratic) {
    for (int a = 0; a < dim; ++a) {
      for (int b = a; b < dim; ++b) {
        p.c2[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] = u(rng);
      }
    }
  }
  return p;
}

// ---------------------------------------------------------------------------
// Built-in analytic geometries.
// ---------------------------------------------------------------------------

// Log-density derivatives of N(μ, σ²) at the standardized node t
// (x = μ + √2·σ·t), divided into first and second derivative arrays.
struct GaussDerivs {
  double d1[2];
  double d2[2][2];
};

GaussDerivs gauss_derivs(double sigma, double t) {
  GaussDerivs d;
  const double rt2 = std::numbers::sqrt2_v<double>;
  d.d1[0] = rt2 * t / sigma;                  // ∂_μ log p
  d.d1[1] = (2.0 * t * t - 1.0) / sigma;      // ∂_σ log p
  d.d2[0][0] = -1.0 / (sigma * sigma);        // ∂_μ∂_μ
  d.d2[0][1] = -2.0 * rt2 * t / (sigma * sigma);
  d.d2[1][0] = d.d2[0][1];
  d.d2[1][1] = (1.0 - 6.0 * t * t) / (sigma * sigma);
  return d;
}

}  // namespace

const GaussHermiteRule& gauss_hermite_rule(int n) {
  if (n < 1) throw DimensionMismatch("Gauss-Hermite order must be at least 1");
  static std::mutex mu;
  static std::map<int, GaussHermiteRule> cache;
  const std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;

  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(n, n);
  for (int i = 1; i < n; ++i) {
    const double beta = std::sqrt(static_cast<double>(i) / 2.0);
    jacobi(i, i - 1) = beta;
    jacobi(i - 1, i) = beta;
  }
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(jacobi);
  GaussHermiteRule rule;
  rule.nodes.resize(static_cast<std::size_t>(n));
  rule.weights.resize(static_cast<std::size_t>(n));
  const double sqrt_pi = std::sqrt(std::numbers::pi_v<double>);
  for (int k = 0; k < n; ++k) {
    rule.nodes[static_cast<std::size_t>(k)] = es.eigenvalues()(k);
    const double v0 = es.eigenvectors()(0, k);
    rule.weights[static_cast<std::size_t>(k)] = sqrt_pi * v0 * v0;
  }
  auto [pos, inserted] = cache.emplace(n, std::move(rule));
  return pos->second;
}

GeometryBundle gaussian_family() {
  const GaussHermiteRule* rule = &gauss_hermite_rule(64);
  Box box;
  box.lo = {-1.0, 0.5};
  box.hi = {1.0, 2.0};

  // Moments by Gauss–Hermite expectation: E[f] = (1/√π) Σ w_i f(t_i).
  const double inv_sqrt_pi = 1.0 / std::sqrt(std::numbers::pi_v<double>);

  auto metric_eval = [rule, inv_sqrt_pi](const ChartPoint& p) {
    const double sigma = p[1];
    Tensor g(2, 2, kAllLower);
    for (std::size_t q = 0; q < rule->nodes.size(); ++q) {
      const GaussDerivs d = gauss_derivs(sigma, rule->nodes[q]);
      const double w = rule->weights[q] * inv_sqrt_pi;
      for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 2; ++j) g(i, j) += w * d.d1[i] * d.d1[j];
      }
    }
    return g;
  };

  auto cubic_eval = [rule, inv_sqrt_pi](const ChartPoint& p) {
    const double sigma = p[1];
    Tensor c(3, 2, kAllLower);
    for (std::size_t q = 0; q < rule->nodes.size(); ++q) {
      const GaussDerivs d = gauss_derivs(sigma, rule->nodes[q]);
      const double w = rule->weights[q] * inv_sqrt_pi;
      for (int k = 0; k < 2; ++k) {
        for (int i = 0; i < 2; ++i) {
          for (int j = 0; j < 2; ++j) c(k, i, j) += w * d.d1[k] * d.d1[i] * d.d1[j];
        }
      }
    }
    return c;
  };

  // Exponential-family (flat) connection: Γ_{i,(jk)} = E[(∂_j∂_k l)(∂_i l)],
  // raised with the Fisher metric.
  auto gamma_e_eval = [rule, inv_sqrt_pi, metric_eval](const ChartPoint& p) {
    const double sigma = p[1];
    double low[2][2][2] = {};
    for (std::size_t q = 0; q < rule->nodes.size(); ++q) {
      const GaussDerivs d = gauss_derivs(sigma, rule->nodes[q]);
      const double w = rule->weights[q] * inv_sqrt_pi;
      for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 2; ++j) {
          for (int k = 0; k < 2; ++k) low[i][j][k] += w * d.d2[j][k] * d.d1[i];
        }
      }
    }
    const MetricAtPoint m = metric_from_components(metric_eval(p));
    Tensor gamma(3, 2, kConn);
    for (int mm = 0; mm < 2; ++mm) {
      for (int j = 0; j < 2; ++j) {
        for (int k = 0; k < 2; ++k) {
          double s = 0.0;
          for (int i = 0; i < 2; ++i) s += m.g_inv(mm, i) * low[i][j][k];
          gamma(mm, j, k) = s;
        }
      }
    }
    return gamma;
  };

  GeometryBundle b;
  b.name = "gaussian_family";
  b.dim = 2;
  b.kind = BundleKind::statistical;
  b.domain = box;
  // Closed-form connections against a quadrature metric: FD metric
  // derivatives agree with them only to truncation level.
  b.conn_data_tol = 5e-5;

  b.g.dim = 2;
  b.g.rank = 2;
  b.g.variance = kAllLower;
  b.g.domain = box;
  b.g.eval = metric_eval;

  b.nabla.dim = 2;
  b.nabla.gamma.dim = 2;
  b.nabla.gamma.rank = 3;
  b.nabla.gamma.variance = kConn;
  b.nabla.gamma.domain = box;
  b.nabla.gamma.eval = gamma_e_eval;

  // Mixture-family side: the metric dual of the exponential connection,
  // formed with the analytic cubic moments.
  b.nabla_star.dim = 2;
  b.nabla_star.gamma.dim = 2;
  b.nabla_star.gamma.rank = 3;
  b.nabla_star.gamma.variance = kConn;
  b.nabla_star.gamma.domain = box;
  b.nabla_star.gamma.eval = [metric_eval, gamma_e_eval, cubic_eval](const ChartPoint& p) {
    const MetricAtPoint m = metric_from_components(metric_eval(p));
    return dual_components(m.g_inv, gamma_e_eval(p), cubic_eval(p));
  };

  return b;
}

GeometryBundle sphere(double radius) {
  if (radius <= 0.0) {
    throw NonpositiveParameter("sphere radius must be positive, got " +
                               std::to_string(radius));
  }
  const double pi = std::numbers::pi_v<double>;
  Box box;
  box.lo = {0.1, -pi};
  box.hi = {pi - 0.1, pi};

  const double r2 = radius * radius;
  auto metric_eval = [r2](const ChartPoint& p) {
    Tensor g(2, 2, kAllLower);
    const double s = std::sin(p[0]);
    g(0, 0) = r2;
    g(1, 1) = r2 * s * s;
    return g;
  };
  auto gamma_eval = [](const ChartPoint& p) {
    Tensor gamma(3, 2, kConn);
    const double s = std::sin(p[0]);
    const double c = std::cos(p[0]);
    gamma(0, 1, 1) = -s * c;
    gamma(1, 0, 1) = c / s;
    gamma(1, 1, 0) = c / s;
    return gamma;
  };

  GeometryBundle b;
  b.name = radius == 1.0 ? "sphere" : [] (double r) {
    std::ostringstream os;
    os << "sphere:" << r;
    return os.str();
  }(radius);
  b.dim = 2;
  b.kind = BundleKind::statistical;
  b.domain = box;
  b.conn_data_tol = 5e-5;  // closed-form connection vs FD metric derivatives
  b.g = ChartField{2, 2, kAllLower, metric_eval, 0.0, box};
  b.nabla = ConnectionField{2, ChartField{2, 3, kConn, gamma_eval, 0.0, box}};
  b.nabla_star = b.nabla;
  return b;
}

GeometryBundle euclidean(int n) {
  if (n < 2 || n > 4) {
    throw DimensionMismatch("euclidean dimension must be 2..4, got " +
                            std::to_string(n));
  }
  const Box box = unit_box(n);
  auto metric_eval = [n](const ChartPoint&) {
    Tensor g(2, n, kAllLower);
    for (int i = 0; i < n; ++i) g(i, i) = 1.0;
    return g;
  };
  auto gamma_eval = [n](const ChartPoint&) { return Tensor(3, n, kConn); };

  GeometryBundle b;
  b.name = "euclidean:" + std::to_string(n);
  b.dim = n;
  b.kind = BundleKind::statistical;
  b.domain = box;
  b.g = ChartField{n, 2, kAllLower, metric_eval, 0.0, box};
  b.nabla = ConnectionField{n, ChartField{n, 3, kConn, gamma_eval, 0.0, box}};
  b.nabla_star = b.nabla;
  return b;
}

GeometryBundle diagonal_cosmo() {
  const Box box = unit_box(4);
  auto metric_eval = [](const ChartPoint& p) {
    const double a = 1.0 + p[0] / 4.0;
    Tensor g(2, 4, kAllLower);
    g(0, 0) = -1.0;
    for (int i = 1; i < 4; ++i) g(i, i) = a * a;
    return g;
  };
  auto gamma_eval = [](const ChartPoint& p) {
    const double a = 1.0 + p[0] / 4.0;
    const double da = 0.25;
    Tensor gamma(3, 4, kConn);
    for (int i = 1; i < 4; ++i) {
      gamma(0, i, i) = a * da;
      gamma(i, 0, i) = da / a;
      gamma(i, i, 0) = da / a;
    }
    return gamma;
  };

  GeometryBundle b;
  b.name = "diagonal_cosmo";
  b.dim = 4;
  b.kind = BundleKind::statistical;
  b.domain = box;
  b.g = ChartField{4, 2, kAllLower, metric_eval, 0.0, box};
  b.nabla = ConnectionField{4, ChartField{4, 3, kConn, gamma_eval, 0.0, box}};
  b.nabla_star = b.nabla;
  return b;
}

// ---------------------------------------------------------------------------
// Randomized bundles.
// ---------------------------------------------------------------------------

namespace {

// Affine matrix family A(x) = A0 + Σ_k A1[k]·x_k with a positive shift:
// g = A·Aᵀ + 2I is symmetric positive definite everywhere.
struct RandomMetric {
  int dim = 0;
  std::array<std::array<double, 4>, 4> a0{};
  std::array<std::array<std::array<double, 4>, 4>, 4> a1{};  // [i][j][axis]

  Tensor eval(const ChartPoint& p) const {
    const int n = dim;
    double a[4][4];
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        double v = a0[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
        for (int k = 0; k < n; ++k) {
          v += a1[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]
                 [static_cast<std::size_t>(k)] *
               p[static_cast<std::size_t>(k)];
        }
        a[i][j] = v;
      }
    }
    Tensor g(2, n, kAllLower);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        double v = (i == j) ? 2.0 : 0.0;
        for (int k = 0; k < n; ++k) v += a[i][k] * a[j][k];
        g(i, j) = v;
      }
    }
    return g;
  }
};

RandomMetric random_metric(std::mt19937_64& rng, int dim) {
  std::uniform_real_distribution<double> u(-0.3, 0.3);
  RandomMetric m;
  m.dim = dim;
  for (int i = 0; i < dim; ++i) {
    for (int j = 0; j < dim; ++j) {
      m.a0[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = u(rng);
      for (int k = 0; k < dim; ++k) {
        m.a1[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]
            [static_cast<std::size_t>(k)] = u(rng);
      }
    }
  }
  return m;
}

ChartField metric_field_of(const RandomMetric& m, const Box& box) {
  ChartField f;
  f.dim = m.dim;
  f.rank = 2;
  f.variance = kAllLower;
  f.domain = box;
  f.eval = [m](const ChartPoint& p) { return m.eval(p); };
  return f;
}

// Degree-2 polynomial rank-3 field with the requested index symmetry.
struct RandomCubic {
  int dim = 0;
  // One polynomial per component, addressed by flattened (k,i,j).
  std::vector<Poly2> comps;

  const Poly2& at(int k, int i, int j) const {
    return comps[static_cast<std::size_t>((k * dim + i) * dim + j)];
  }
  Poly2& at(int k, int i, int j) {
    return comps[static_cast<std::size_t>((k * dim + i) * dim + j)];
  }

  Tensor eval(const ChartPoint& p) const {
    Tensor c(3, dim, kAllLower);
    for (int k = 0; k < dim; ++k) {
      for (int i = 0; i < dim; ++i) {
        for (int j = 0; j < dim; ++j) c(k, i, j) = at(k, i, j).eval(p);
      }
    }
    return c;
  }
};

RandomCubic random_cubic(std::mt19937_64& rng, int dim, bool totally_symmetric) {
  RandomCubic c;
  c.dim = dim;
  c.comps.assign(static_cast<std::size_t>(dim * dim * dim), Poly2{});
  if (totally_symmetric) {
    for (int k = 0; k < dim; ++k) {
      for (int i = k; i < dim; ++i) {
        for (int j = i; j < dim; ++j) {
          const Poly2 p = random_poly2(rng, dim, -0.5, 0.5, true);
          const int s[3] = {k, i, j};
          int perms[6][3] = {{s[0], s[1], s[2]}, {s[0], s[2], s[1]}, {s[1], s[0], s[2]},
                             {s[1], s[2], s[0]}, {s[2], s[0], s[1]}, {s[2], s[1], s[0]}};
          for (auto& q : perms) c.at(q[0], q[1], q[2]) = p;
        }
      }
    }
  } else {
    for (int k = 0; k < dim; ++k) {
      for (int i = 0; i < dim; ++i) {
        for (int j = i; j < dim; ++j) {
          const Poly2 p = random_poly2(rng, dim, -0.5, 0.5, true);
          c.at(k, i, j) = p;
          c.at(k, j, i) = p;
        }
      }
    }
  }
  return c;
}

ChartField cubic_field_of(const RandomCubic& c, const Box& box) {
  ChartField f;
  f.dim = c.dim;
  f.rank = 3;
  f.variance = kAllLower;
  f.domain = box;
  f.eval = [c](const ChartPoint& p) { return c.eval(p); };
  return f;
}

GeometryBundle build_random(BundleKind kind, int dim, std::mt19937_64& rng,
                            const std::string& name) {
  const Box box = unit_box(dim);
  const RandomMetric metric = random_metric(rng, dim);
  ChartField g_field = metric_field_of(metric, box);

  // Degeneracy probe (the construction is positive definite by design; the
  // probe guards against future generator changes).
  for (const ChartPoint& p : halton_points(box, 20)) {
    (void)metric_from_components(g_field(p));
  }

  switch (kind) {
    case BundleKind::statistical: {
      const RandomCubic cubic = random_cubic(rng, dim, true);
      GeometryBundle b = statistical_pair_from_cubic(
          g_field, cubic_field_of(cubic, box), CubicMode::totally_symmetric, name);
      b.name = name;
      return b;
    }
    case BundleKind::quasi_statistical: {
      const RandomCubic cubic = random_cubic(rng, dim, false);
      GeometryBundle b = statistical_pair_from_cubic(
          g_field, cubic_field_of(cubic, box), CubicMode::symmetric_last_two, name);
      b.name = name;
      return b;
    }
    case BundleKind::general: {
      // Levi-Civita plus an affine perturbation; the dual carries the rest.
      std::vector<Poly2> pert;
      pert.reserve(static_cast<std::size_t>(dim * dim * dim));
      for (int c = 0; c < dim * dim * dim; ++c) {
        pert.push_back(random_poly2(rng, dim, -0.3, 0.3, false));
      }
      GeometryBundle b;
      b.name = name;
      b.dim = dim;
      b.kind = BundleKind::general;
      b.domain = box;
      b.g = g_field;
      b.nabla.dim = dim;
      b.nabla.gamma.dim = dim;
      b.nabla.gamma.rank = 3;
      b.nabla.gamma.variance = kConn;
      b.nabla.gamma.domain = box;
      b.nabla.gamma.eval = [g_field, pert, dim](const ChartPoint& p) {
        Tensor gamma = levi_civita(g_field, p);
        int c = 0;
        for (int k = 0; k < dim; ++k) {
          for (int i = 0; i < dim; ++i) {
            for (int j = 0; j < dim; ++j) {
              gamma(k, i, j) += pert[static_cast<std::size_t>(c++)].eval(p);
            }
          }
        }
        return gamma;
      };
      b.nabla_star = dual_connection(g_field, b.nabla);
      return b;
    }
    case BundleKind::pre_statistical: {
      // Torsion-equal pair: start from a totally symmetric cubic (so K is
      // symmetric) and add g^{-1}·b with b antisymmetric in its first two
      // lowered slots — this leaves ∇g = C intact while introducing equal
      // torsion on both sides.
      const RandomCubic cubic = random_cubic(rng, dim, true);
      const ChartField c_field = cubic_field_of(cubic, box);
      GeometryBundle base = statistical_pair_from_cubic(
          g_field, c_field, CubicMode::totally_symmetric, name);

      std::vector<Poly2> raw;
      raw.reserve(static_cast<std::size_t>(dim * dim * dim));
      for (int c = 0; c < dim * dim * dim; ++c) {
        raw.push_back(random_poly2(rng, dim, -0.3, 0.3, false));
      }
      auto b_low = [raw, dim](const ChartPoint& p) {
        Tensor b3(3, dim, kAllLower);
        auto val = [&](int i, int j, int k) {
          return raw[static_cast<std::size_t>((i * dim + j) * dim + k)].eval(p);
        };
        for (int i = 0; i < dim; ++i) {
          for (int j = 0; j < dim; ++j) {
            for (int k = 0; k < dim; ++k) {
              b3(i, j, k) = 0.5 * (val(i, j, k) - val(j, i, k));
            }
          }
        }
        return b3;
      };

      GeometryBundle b;
      b.name = name;
      b.dim = dim;
      b.kind = BundleKind::pre_statistical;
      b.domain = box;
      b.g = g_field;
      const auto base_gamma = base.nabla.gamma.eval;
      b.nabla.dim = dim;
      b.nabla.gamma.dim = dim;
      b.nabla.gamma.rank = 3;
      b.nabla.gamma.variance = kConn;
      b.nabla.gamma.domain = box;
      b.nabla.gamma.eval = [base_gamma, b_low, g_field, dim](const ChartPoint& p) {
        Tensor gamma = base_gamma(p);
        const MetricAtPoint m = metric_at(g_field, p);
        const Tensor bl = b_low(p);
        for (int k = 0; k < dim; ++k) {
          for (int j = 0; j < dim; ++j) {
            for (int l = 0; l < dim; ++l) {
              double s = 0.0;
              for (int i = 0; i < dim; ++i) s += m.g_inv(k, i) * bl(i, j, l);
              gamma(k, j, l) += s;
            }
          }
        }
        return gamma;
      };
      const auto primal_gamma = b.nabla.gamma.eval;
      b.nabla_star.dim = dim;
      b.nabla_star.gamma = b.nabla.gamma;
      b.nabla_star.gamma.eval = [primal_gamma, g_field, c_field](const ChartPoint& p) {
        const MetricAtPoint m = metric_at(g_field, p);
        return dual_components(m.g_inv, primal_gamma(p), c_field(p));
      };
      return b;
    }
  }
  throw GenerationFailure("unsupported random bundle kind");
}

}  // namespace

GeometryBundle random_bundle(BundleKind kind, int dim, std::uint64_t seed) {
  if (dim < 2 || dim > 4) {
    throw DimensionMismatch("random bundle dimension must be 2..4, got " +
                            std::to_string(dim));
  }
  const std::string name = "random:" + to_string(kind) + ":" + std::to_string(dim) +
                           ":" + std::to_string(seed);
  for (int attempt = 0; attempt < 10; ++attempt) {
    std::mt19937_64 rng(seed + 0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(attempt));
    try {
      return build_random(kind, dim, rng, name);
    } catch (const SingularMetric&) {
      continue;
    } catch (const AsymmetricMetric&) {
      continue;
    }
  }
  throw GenerationFailure("random bundle generation failed after 10 attempts for " +
                          name);
}

// ---------------------------------------------------------------------------
// JSON manifold descriptors.
// ---------------------------------------------------------------------------

namespace {

std::vector<int> parse_int_list(const std::string& s, const std::string& key) {
  std::vector<int> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    const std::size_t comma = s.find(',', start);
    const std::string tok =
        s.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
    std::size_t pos = 0;
    int v = 0;
    try {
      v = std::stoi(tok, &pos);
    } catch (const std::exception&) {
      throw ParseError("malformed term key '" + key + "'");
    }
    if (pos != tok.size()) throw ParseError("malformed term key '" + key + "'");
    out.push_back(v);
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

// Sparse polynomial tensor component: exponent tuple -> coefficient.
using MonoMap = std::map<std::array<int, 4>, double>;

double eval_monos(const MonoMap& monos, const ChartPoint& p) {
  double v = 0.0;
  for (const auto& [expo, coeff] : monos) {
    double term = coeff;
    for (std::size_t a = 0; a < p.size(); ++a) {
      for (int e = 0; e < expo[a]; ++e) term *= p[a];
    }
    v += term;
  }
  return v;
}

struct ParsedTensorField {
  int rank = 0;
  int dim = 0;
  bool mirror_last_two = false;  // metric/cubic symmetry fill
  std::map<std::array<int, 3>, MonoMap> comps;

  Tensor eval(const ChartPoint& p,
              const std::array<Variance, Tensor::kMaxRank>& variance) const {
    Tensor t(rank, dim, variance);
    for (const auto& [idx, monos] : comps) {
      const double v = eval_monos(monos, p);
      if (rank == 2) {
        t(idx[0], idx[1]) = v;
        t(idx[1], idx[0]) = v;
      } else if (mirror_last_two) {
        t(idx[0], idx[1], idx[2]) = v;
        t(idx[0], idx[2], idx[1]) = v;
      } else {
        t(idx[0], idx[1], idx[2]) = v;
      }
    }
    return t;
  }
};

std::array<int, 4> expo_from_list(const std::vector<int>& e, int dim,
                                  const std::string& key) {
  if (static_cast<int>(e.size()) != dim) {
    throw ValidationError("dimension: expected " + std::to_string(dim) +
                          " exponents in term '" + key + "'");
  }
  std::array<int, 4> out{};
  int total = 0;
  for (int a = 0; a < dim; ++a) {
    if (e[static_cast<std::size_t>(a)] < 0) {
      throw ParseError("malformed term key '" + key + "': negative exponent");
    }
    out[static_cast<std::size_t>(a)] = e[static_cast<std::size_t>(a)];
    total += e[static_cast<std::size_t>(a)];
  }
  if (total > 4) {
    throw ValidationError("polynomial degree above 4 in term '" + key + "'");
  }
  return out;
}

// Insert a monomial under a canonical index; conflicting re-specification of
// the same monomial raises the named symmetry invariant.
void insert_mono(ParsedTensorField& f, const std::array<int, 3>& canon,
                 const std::array<int, 4>& expo, double coeff,
                 const std::string& invariant, const std::string& key) {
  MonoMap& m = f.comps[canon];
  auto it = m.find(expo);
  if (it == m.end()) {
    m.emplace(expo, coeff);
  } else if (it->second != coeff) {
    throw ValidationError(invariant + " violated: conflicting coefficients for term '" +
                          key + "'");
  }
}

ParsedTensorField parse_descriptor(const json& j, int rank, int dim,
                                   bool mirror_last_two, const std::string& what) {
  ParsedTensorField f;
  f.rank = rank;
  f.dim = dim;
  f.mirror_last_two = mirror_last_two;

  if (!j.is_object() || !j.contains("kind")) {
    throw ParseError(what + " descriptor must be an object with a 'kind'");
  }
  const std::string kind = j.at("kind").get<std::string>();

  if (kind == "polynomial") {
    const json& terms = j.at("terms");
    if (!terms.is_object()) throw ParseError(what + " 'terms' must be an object");
    for (const auto& [key, value] : terms.items()) {
      if (!value.is_number()) {
        throw ParseError("malformed term value for key '" + key + "'");
      }
      const std::size_t bar = key.find('|');
      if (bar == std::string::npos || key.find('|', bar + 1) != std::string::npos) {
        throw ParseError("malformed term key '" + key + "'");
      }
      const std::vector<int> idx = parse_int_list(key.substr(0, bar), key);
      const std::vector<int> exp = parse_int_list(key.substr(bar + 1), key);
      if (static_cast<int>(idx.size()) != rank) {
        throw ValidationError("dimension: expected " + std::to_string(rank) +
                              " indices in term '" + key + "'");
      }
      for (int v : idx) {
        if (v < 0 || v >= dim) {
          throw ValidationError("dimension: index out of range in term '" + key + "'");
        }
      }
      const std::array<int, 4> expo = expo_from_list(exp, dim, key);
      const double coeff = value.get<double>();

      std::array<int, 3> canon{};
      std::string invariant;
      if (rank == 2) {
        canon = {std::min(idx[0], idx[1]), std::max(idx[0], idx[1]), 0};
        invariant = "metric symmetry";
      } else if (mirror_last_two) {
        canon = {idx[0], std::min(idx[1], idx[2]), std::max(idx[1], idx[2])};
        invariant = "cubic last-two symmetry";
      } else {
        canon = {idx[0], idx[1], idx[2]};
        invariant = "term uniqueness";
      }
      insert_mono(f, canon, expo, coeff, invariant, key);
    }
    return f;
  }

  if (kind == "diag") {
    const json& entries = j.at("entries");
    if (!entries.is_array()) throw ParseError(what + " 'entries' must be an array");
    if (static_cast<int>(entries.size()) != dim) {
      throw ValidationError("dimension: diag descriptor needs " + std::to_string(dim) +
                            " entries, got " + std::to_string(entries.size()));
    }
    for (int a = 0; a < dim; ++a) {
      const json& e = entries[static_cast<std::size_t>(a)];
      const std::array<int, 3> canon =
          rank == 2 ? std::array<int, 3>{a, a, 0} : std::array<int, 3>{a, a, a};
      if (e.is_number()) {
        insert_mono(f, canon, std::array<int, 4>{}, e.get<double>(), "diag entry",
                    "entry " + std::to_string(a));
      } else if (e.is_object()) {
        for (const auto& [key, value] : e.items()) {
          if (!value.is_number()) {
            throw ParseError("malformed diag coefficient for key '" + key + "'");
          }
          const std::array<int, 4> expo =
              expo_from_list(parse_int_list(key, key), dim, key);
          insert_mono(f, canon, expo, value.get<double>(), "diag entry", key);
        }
      } else {
        throw ParseError(what + " diag entries must be numbers or exponent maps");
      }
    }
    return f;
  }

  throw ParseError(what + " descriptor kind must be 'polynomial' or 'diag', got '" +
                   kind + "'");
}

BundleKind parse_kind_token(const std::string& s) {
  if (s == "statistical") return BundleKind::statistical;
  if (s == "quasi_statistical") return BundleKind::quasi_statistical;
  if (s == "general") return BundleKind::general;
  if (s == "pre_statistical") return BundleKind::pre_statistical;
  throw ValidationError(
      "kind must be one of statistical | quasi_statistical | general | "
      "pre_statistical, got '" +
      s + "'");
}

GeometryBundle builtin_from_json(const json& j) {
  const std::string name = j.at("name").get<std::string>();
  if (name == "gaussian_family") return gaussian_family();
  if (name == "sphere") return sphere(j.value("radius", 1.0));
  if (name == "euclidean") return euclidean(j.value("dim", 3));
  if (name == "diagonal_cosmo") return diagonal_cosmo();
  if (name == "random") {
    const BundleKind kind = parse_kind_token(j.at("kind").get<std::string>());
    const int dim = j.at("dim").get<int>();
    const std::uint64_t seed = j.at("seed").get<std::uint64_t>();
    return random_bundle(kind, dim, seed);
  }
  throw UnknownName("unknown built-in manifold '" + name +
                    "'; valid forms: " + std::string(kValidNameForms));
}

GeometryBundle descriptor_from_json(const json& j) {
  if (j.contains("schema_version")) {
    const json& sv = j.at("schema_version");
    if (!sv.is_number_integer() || sv.get<int>() != 1) {
      throw ValidationError("schema_version must be 1");
    }
  }
  if (!j.contains("dim")) throw ValidationError("dimension: 'dim' is required");
  const int dim = j.at("dim").get<int>();
  if (dim < 2 || dim > 4) {
    throw ValidationError("dimension: dim must be 2..4, got " + std::to_string(dim));
  }

  if (!j.contains("domain")) throw ValidationError("domain ordering: 'domain' is required");
  const json& dj = j.at("domain");
  if (!dj.is_array() || static_cast<int>(dj.size()) != dim) {
    throw ValidationError("dimension: domain must list " + std::to_string(dim) +
                          " [lo, hi] pairs");
  }
  Box box;
  for (int a = 0; a < dim; ++a) {
    const json& pair = dj[static_cast<std::size_t>(a)];
    if (!pair.is_array() || pair.size() != 2) {
      throw ValidationError("dimension: domain axis " + std::to_string(a) +
                            " must be a [lo, hi] pair");
    }
    const double lo = pair[0].get<double>();
    const double hi = pair[1].get<double>();
    if (!(lo < hi)) {
      throw ValidationError("domain ordering violated on axis " + std::to_string(a) +
                            ": lo >= hi");
    }
    box.lo.push_back(lo);
    box.hi.push_back(hi);
  }

  if (!j.contains("metric")) throw ValidationError("metric invertibility: 'metric' is required");
  const ParsedTensorField metric =
      parse_descriptor(j.at("metric"), 2, dim, false, "metric");

  bool has_cubic = false;
  ParsedTensorField cubic;
  if (j.contains("cubic") && !(j.at("cubic").is_string() &&
                               j.at("cubic").get<std::string>() == "zero")) {
    if (j.at("cubic").is_string()) {
      throw ParseError("cubic must be a descriptor object or the string \"zero\"");
    }
    cubic = parse_descriptor(j.at("cubic"), 3, dim, true, "cubic");
    has_cubic = true;
  }

  const std::uint64_t seed =
      j.contains("seed") ? j.at("seed").get<std::uint64_t>() : 0u;
  double fd_step = 0.0;
  if (j.contains("fd_step")) {
    fd_step = j.at("fd_step").get<double>();
    if (!(fd_step > 0.0)) throw ValidationError("fd_step must be positive");
  }

  ChartField g_field;
  g_field.dim = dim;
  g_field.rank = 2;
  g_field.variance = kAllLower;
  g_field.domain = box;
  g_field.fd_step = fd_step;
  g_field.eval = [metric](const ChartPoint& p) { return metric.eval(p, kAllLower); };

  ChartField c_field;
  c_field.dim = dim;
  c_field.rank = 3;
  c_field.variance = kAllLower;
  c_field.domain = box;
  c_field.fd_step = fd_step;
  if (has_cubic) {
    c_field.eval = [cubic](const ChartPoint& p) { return cubic.eval(p, kAllLower); };
  } else {
    c_field.eval = [dim](const ChartPoint&) { return Tensor(3, dim, kAllLower); };
  }

  // Deterministic validation sample, offset by the seed.
  const int off = static_cast<int>(seed % 64);
  std::vector<ChartPoint> all = halton_points(box, 50 + off);
  const std::vector<ChartPoint> pts(all.begin() + off, all.end());

  // Metric invertibility/symmetry on the sample.
  for (const ChartPoint& p : pts) {
    try {
      (void)metric_from_components(g_field(p));
    } catch (const SingularMetric& e) {
      throw ValidationError("metric invertibility violated at a validation point: " +
                            std::string(e.what()));
    } catch (const AsymmetricMetric& e) {
      throw ValidationError("metric symmetry violated at a validation point: " +
                            std::string(e.what()));
    }
  }

  // Total-symmetry audit: explicit `statistical` demands it; otherwise it
  // decides the inferred kind.
  bool totally_symmetric = true;
  double worst = 0.0;
  int worst_idx[3] = {0, 0, 0};
  for (const ChartPoint& p : pts) {
    const Tensor c = c_field(p);
    const double tol = 1e-10 * std::max(1.0, c.max_abs());
    for (int k = 0; k < dim; ++k) {
      for (int i = 0; i < dim; ++i) {
        for (int jj = 0; jj < dim; ++jj) {
          const double asym = std::abs(c(k, i, jj) - c(i, k, jj));
          if (asym > tol && asym > worst) {
            totally_symmetric = false;
            worst = asym;
            worst_idx[0] = k;
            worst_idx[1] = i;
            worst_idx[2] = jj;
          }
        }
      }
    }
  }

  std::string kind_token;
  if (j.contains("kind")) {
    kind_token = j.at("kind").get<std::string>();
    if (kind_token != "statistical" && kind_token != "quasi_statistical") {
      throw ValidationError(
          "kind must be 'statistical' or 'quasi_statistical', got '" + kind_token +
          "'");
    }
  } else {
    kind_token = totally_symmetric ? "statistical" : "quasi_statistical";
  }
  if (kind_token == "statistical" && !totally_symmetric) {
    throw ValidationError(
        "cubic total symmetry violated at slot (" + std::to_string(worst_idx[0]) +
        ", " + std::to_string(worst_idx[1]) + ", " + std::to_string(worst_idx[2]) +
        "): asymmetry " + std::to_string(worst));
  }

  const CubicMode mode = kind_token == "statistical" ? CubicMode::totally_symmetric
                                                     : CubicMode::symmetric_last_two;
  GeometryBundle bundle;
  try {
    bundle = statistical_pair_from_cubic(g_field, c_field, mode, "spec");
  } catch (const CubicSymmetryViolation& e) {
    throw ValidationError(e.what());
  }
  bundle.fd_step = fd_step;

  // Optional diagnostics hook: a verbatim perturbation of the dual
  // connection coefficients (documents carrying it deliberately break the
  // compatibility split; they still load).
  if (j.contains("dual_perturbation")) {
    const ParsedTensorField pert =
        parse_descriptor(j.at("dual_perturbation"), 3, dim, false, "dual_perturbation");
    const auto base_star = bundle.nabla_star.gamma.eval;
    bundle.nabla_star.gamma.eval = [base_star, pert](const ChartPoint& p) {
      Tensor t = base_star(p);
      t += pert.eval(p, kConn);
      return t;
    };
  }

  return bundle;
}

}  // namespace

GeometryBundle load_spec(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ParseError(e.what());
  }
  if (!j.is_object()) throw ParseError("manifold spec must be a JSON object");
  try {
    if (j.contains("name")) return builtin_from_json(j);
    return descriptor_from_json(j);
  } catch (const Error&) {
    throw;  // already one of ours
  } catch (const json::exception& e) {
    throw ParseError(e.what());
  }
}

GeometryBundle load_spec_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ParseError("cannot read manifold spec file '" + path + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  GeometryBundle b = load_spec(ss.str());
  b.name = path;
  return b;
}

GeometryBundle manifold_by_name(const std::string& name) {
  auto unknown = [&]() -> UnknownName {
    return UnknownName("unknown manifold '" + name +
                       "'; valid forms: " + std::string(kValidNameForms));
  };

  if (name == "gaussian_family") return gaussian_family();
  if (name == "sphere") return sphere();
  if (name == "euclidean") return euclidean(3);
  if (name == "diagonal_cosmo") return diagonal_cosmo();

  if (name.rfind("sphere:", 0) == 0) {
    const std::string arg = name.substr(7);
    std::size_t pos = 0;
    double r = 0.0;
    try {
      r = std::stod(arg, &pos);
    } catch (const std::exception&) {
      throw unknown();
    }
    if (pos != arg.size()) throw unknown();
    GeometryBundle b = sphere(r);
    b.name = name;
    return b;
  }
  if (name.rfind("euclidean:", 0) == 0) {
    const std::string arg = name.substr(10);
    std::size_t pos = 0;
    int n = 0;
    try {
      n = std::stoi(arg, &pos);
    } catch (const std::exception&) {
      throw unknown();
    }
    if (pos != arg.size()) throw unknown();
    return euclidean(n);
  }
  if (name.rfind("random:", 0) == 0) {
    const std::string rest = name.substr(7);
    const std::size_t c1 = rest.find(':');
    const std::size_t c2 = c1 == std::string::npos ? std::string::npos
                                                   : rest.find(':', c1 + 1);
    if (c1 == std::string::npos || c2 == std::string::npos) throw unknown();
    const std::string kind_tok = rest.substr(0, c1);
    const std::string dim_tok = rest.substr(c1 + 1, c2 - c1 - 1);
    const std::string seed_tok = rest.substr(c2 + 1);
    BundleKind kind;
    try {
      kind = parse_kind_token(kind_tok);
    } catch (const ValidationError&) {
      throw unknown();
    }
    int dim = 0;
    std::uint64_t seed = 0;
    try {
      std::size_t pos = 0;
      dim = std::stoi(dim_tok, &pos);
      if (pos != dim_tok.size()) throw unknown();
      pos = 0;
      seed = std::stoull(seed_tok, &pos);
      if (pos != seed_tok.size()) throw unknown();
    } catch (const UnknownName&) {
      throw;
    } catch (const std::exception&) {
      throw unknown();
    }
    return random_bundle(kind, dim, seed);
  }

  if (std::filesystem::exists(name)) return load_spec_file(name);
  throw unknown();
}

// ---------------------------------------------------------------------------
// Equiaffine cases.
// ---------------------------------------------------------------------------

namespace {

ChartField scalar_field(int dim, const Box& box,
                        std::function<double(const ChartPoint&)> f) {
  ChartField out;
  out.dim = dim;
  out.rank = 0;
  out.domain = box;
  out.eval = [f = std::move(f)](const ChartPoint& p) {
    return Tensor::scalar(f(p));
  };
  return out;
}

}  // namespace

std::vector<EquiaffineCase> equiaffine_cases(int count, std::uint64_t seed) {
  std::vector<EquiaffineCase> out;
  out.reserve(static_cast<std::size_t>(count));
  std::mt19937_64 rng(seed);

  RandomMetric metric;
  Box box;
  ChartField g_field;

  for (int c = 0; c < count; ++c) {
    const int pair = c / 2;
    const int dim = 2 + (pair % 2);
    if (c % 2 == 0) {
      box = unit_box(dim);
      metric = random_metric(rng, dim);
      g_field = metric_field_of(metric, box);
    }

    EquiaffineCase ec;
    const int type = c % 3;

    if (type == 0) {
      // Levi-Civita with its canonical volume λ = √|g|.
      ec.name = "equiaffine:lc:" + std::to_string(c);
      ec.torsion_free = true;
      ec.lambda = scalar_field(dim, box, [g_field](const ChartPoint& p) {
        return metric_from_components(g_field(p)).sqrt_abs_det;
      });
      GeometryBundle b;
      b.name = ec.name;
      b.dim = dim;
      b.kind = BundleKind::statistical;
      b.domain = box;
      b.g = g_field;
      b.nabla = levi_civita_field(g_field);
      b.nabla_star = dual_connection(g_field, b.nabla);
      ec.bundle = std::move(b);
      out.push_back(std::move(ec));
      continue;
    }

    // Types 1 and 2 share a random potential φ with λ = e^φ; ψ measures the
    // trace gap against the Levi-Civita volume.
    const Poly2 phi = random_poly2(rng, dim, -0.3, 0.3, true);
    auto psi_at = [g_field, phi, dim](const ChartPoint& p) {
      const Tensor dlogv = log_sqrt_det_gradient(g_field, p);
      std::array<double, 4> psi{};
      for (int i = 0; i < dim; ++i) {
        psi[static_cast<std::size_t>(i)] = phi.grad(p, i) - dlogv(i);
      }
      return psi;
    };

    ec.lambda = scalar_field(dim, box, [phi](const ChartPoint& p) {
      return std::exp(phi.eval(p));
    });

    GeometryBundle b;
    b.dim = dim;
    b.domain = box;
    b.g = g_field;
    b.kind = BundleKind::general;
    b.nabla.dim = dim;
    b.nabla.gamma.dim = dim;
    b.nabla.gamma.rank = 3;
    b.nabla.gamma.variance = kConn;
    b.nabla.gamma.domain = box;

    if (type == 1) {
      // Torsion-free trace adjustment: B^k_{ij} = (δ^k_i ψ_j + δ^k_j ψ_i)/(n+1).
      ec.name = "equiaffine:projective:" + std::to_string(c);
      ec.torsion_free = true;
      b.nabla.gamma.eval = [g_field, psi_at, dim](const ChartPoint& p) {
        Tensor gamma = levi_civita(g_field, p);
        const auto psi = psi_at(p);
        const double f = 1.0 / (dim + 1.0);
        for (int k = 0; k < dim; ++k) {
          for (int i = 0; i < dim; ++i) {
            for (int jj = 0; jj < dim; ++jj) {
              double add = 0.0;
              if (k == i) add += psi[static_cast<std::size_t>(jj)];
              if (k == jj) add += psi[static_cast<std::size_t>(i)];
              gamma(k, i, jj) += f * add;
            }
          }
        }
        return gamma;
      };
    } else {
      // Torsional trace adjustment: B^k_{ji} = δ^k_j ψ_i / n (vector slot j,
      // direction slot i) — same volume trace, nonzero torsion.
      ec.name = "equiaffine:torsional:" + std::to_string(c);
      ec.torsion_free = false;
      b.nabla.gamma.eval = [g_field, psi_at, dim](const ChartPoint& p) {
        Tensor gamma = levi_civita(g_field, p);
        const auto psi = psi_at(p);
        const double f = 1.0 / static_cast<double>(dim);
        for (int k = 0; k < dim; ++k) {
          for (int i = 0; i < dim; ++i) {
            gamma(k, k, i) += f * psi[static_cast<std::size_t>(i)];
          }
        }
        return gamma;
      };
    }

    b.name = ec.name;
    b.nabla_star = dual_connection(g_field, b.nabla);
    ec.bundle = std::move(b);
    out.push_back(std::move(ec));
  }

  return out;
}

}  // namespace igcurv
