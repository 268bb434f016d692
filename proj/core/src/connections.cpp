#include "igcurv/connections.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>

namespace igcurv {

namespace {

// dg[k][i][j] = ∂_k g_ij (derivative direction first).
Tensor metric_derivative(const ChartField& g_field, const ChartPoint& p, double base) {
  const int n = g_field.dim;
  Tensor dg(3, n, kAllLower);
  for (int k = 0; k < n; ++k) {
    const Tensor dk = partial_derivative(g_field, p, k, base);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) dg(k, i, j) = dk(i, j);
    }
  }
  return dg;
}

void require_connection_shape(const Tensor& gamma, const char* what) {
  if (gamma.rank() != 3) {
    throw DimensionMismatch(std::string(what) + " must be rank 3, got rank " +
                            std::to_string(gamma.rank()));
  }
}

double positive_volume(const ChartField& lambda_field, const ChartPoint& q) {
  const Tensor v = lambda_field.eval(q);
  if (v.rank() != 0) {
    throw DimensionMismatch("volume coefficient field must be rank 0");
  }
  const double lambda = v();
  if (!(lambda > 0.0)) {
    std::ostringstream os;
    os << "volume coefficient " << lambda << " is not positive at (";
    for (std::size_t i = 0; i < q.size(); ++i) os << (i ? ", " : "") << q[i];
    os << ")";
    throw NonpositiveVolume(os.str());
  }
  return lambda;
}

}  // namespace

std::string to_string(BundleKind k) {
  switch (k) {
    case BundleKind::general: return "general";
    case BundleKind::pre_statistical: return "pre_statistical";
    case BundleKind::statistical: return "statistical";
    case BundleKind::quasi_statistical: return "quasi_statistical";
  }
  return "general";
}

Tensor levi_civita_components(const Tensor& g_inv, const Tensor& dg) {
  const int n = g_inv.dim();
  Tensor gamma(3, n, kConn);
  for (int l = 0; l < n; ++l) {
    for (int j = 0; j < n; ++j) {
      for (int k = 0; k < n; ++k) {
        double s = 0.0;
        for (int i = 0; i < n; ++i) {
          s += g_inv(l, i) * 0.5 * (dg(k, i, j) + dg(j, i, k) - dg(i, j, k));
        }
        gamma(l, j, k) = s;
      }
    }
  }
  return gamma;
}

Tensor nonmetricity_components(const Tensor& g, const Tensor& dg, const Tensor& gamma) {
  require_connection_shape(gamma, "connection");
  const int n = g.dim();
  Tensor c(3, n, kAllLower);
  for (int k = 0; k < n; ++k) {
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        double s = dg(k, i, j);
        for (int m = 0; m < n; ++m) {
          s -= g(m, j) * gamma(m, i, k) + g(m, i) * gamma(m, j, k);
        }
        c(k, i, j) = s;
      }
    }
  }
  return c;
}

Tensor torsion_components(const Tensor& gamma) {
  require_connection_shape(gamma, "connection");
  const int n = gamma.dim();
  Tensor t(3, n, kConn);
  for (int a = 0; a < n; ++a) {
    for (int k = 0; k < n; ++k) {
      for (int l = 0; l < n; ++l) t(a, k, l) = gamma(a, l, k) - gamma(a, k, l);
    }
  }
  return t;
}

Tensor dual_components(const Tensor& g_inv, const Tensor& gamma, const Tensor& C) {
  require_connection_shape(gamma, "connection");
  const int n = gamma.dim();
  Tensor out(3, n, kConn);
  for (int m = 0; m < n; ++m) {
    for (int k = 0; k < n; ++k) {
      for (int i = 0; i < n; ++i) {
        double s = gamma(m, k, i);
        for (int j = 0; j < n; ++j) s += g_inv(m, j) * C(i, j, k);
        out(m, k, i) = s;
      }
    }
  }
  return out;
}

Tensor difference_components(const Tensor& gamma, const Tensor& gamma_star) {
  require_connection_shape(gamma, "connection");
  require_connection_shape(gamma_star, "connection");
  Tensor out = gamma_star;
  out -= gamma;
  return out;
}

Tensor trace_right(const Tensor& a) {
  if (a.rank() != 3) {
    throw DimensionMismatch("trace over a rank-" + std::to_string(a.rank()) +
                            " tensor; expected rank 3");
  }
  if (a.variance(0) != Variance::upper || a.variance(2) != Variance::lower) {
    throw VarianceMismatch("right trace contracts an upper first slot with a lower last slot");
  }
  const int n = a.dim();
  Tensor out(1, n, kAllLower);
  for (int i = 0; i < n; ++i) {
    double s = 0.0;
    for (int k = 0; k < n; ++k) s += a(k, i, k);
    out(i) = s;
  }
  return out;
}

Tensor trace_left(const Tensor& a) {
  if (a.rank() != 3) {
    throw DimensionMismatch("trace over a rank-" + std::to_string(a.rank()) +
                            " tensor; expected rank 3");
  }
  if (a.variance(0) != Variance::upper || a.variance(1) != Variance::lower) {
    throw VarianceMismatch("left trace contracts an upper first slot with a lower middle slot");
  }
  const int n = a.dim();
  Tensor out(1, n, kAllLower);
  for (int i = 0; i < n; ++i) {
    double s = 0.0;
    for (int k = 0; k < n; ++k) s += a(k, k, i);
    out(i) = s;
  }
  return out;
}

Tensor symmetrize_lower(const Tensor& a) {
  require_connection_shape(a, "rank-3 tensor");
  const int n = a.dim();
  Tensor out = a;
  for (int k = 0; k < n; ++k) {
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) out(k, i, j) = 0.5 * (a(k, i, j) + a(k, j, i));
    }
  }
  return out;
}

Tensor levi_civita(const ChartField& g_field, const ChartPoint& p, double base) {
  const MetricAtPoint m = metric_at(g_field, p);
  const Tensor dg = metric_derivative(g_field, p, base);
  return levi_civita_components(m.g_inv, dg);
}

ConnectionField levi_civita_field(const ChartField& g_field) {
  ConnectionField out;
  out.dim = g_field.dim;
  out.gamma.dim = g_field.dim;
  out.gamma.rank = 3;
  out.gamma.variance = kConn;
  out.gamma.fd_step = g_field.fd_step;
  out.gamma.domain = g_field.domain;
  out.gamma.eval = [g_field](const ChartPoint& p) { return levi_civita(g_field, p); };
  return out;
}

Tensor nonmetricity(const ChartField& g_field, const ConnectionField& conn,
                    const ChartPoint& p, double base) {
  const MetricAtPoint m = metric_at(g_field, p);
  const Tensor dg = metric_derivative(g_field, p, base);
  return nonmetricity_components(m.g, dg, conn(p));
}

Tensor torsion(const ConnectionField& conn, const ChartPoint& p) {
  return torsion_components(conn(p));
}

ConnectionField dual_connection(const ChartField& g_field, const ConnectionField& conn,
                                double base) {
  ConnectionField out;
  out.dim = conn.dim;
  out.gamma.dim = conn.gamma.dim;
  out.gamma.rank = 3;
  out.gamma.variance = kConn;
  out.gamma.fd_step = conn.gamma.fd_step;
  out.gamma.domain = conn.gamma.domain;
  out.gamma.eval = [g_field, conn, base](const ChartPoint& p) {
    const MetricAtPoint m = metric_at(g_field, p);
    const Tensor dg = metric_derivative(g_field, p, base);
    const Tensor gamma = conn(p);
    const Tensor c = nonmetricity_components(m.g, dg, gamma);
    return dual_components(m.g_inv, gamma, c);
  };
  return out;
}

Tensor difference_tensor(const ConnectionField& conn, const ConnectionField& conn_star,
                         const ChartPoint& p) {
  return difference_components(conn(p), conn_star(p));
}

ConnectionField average_connection(const ConnectionField& conn,
                                   const ConnectionField& conn_star) {
  return alpha_connection(conn, conn_star, 0.0);
}

ConnectionField alpha_connection(const ConnectionField& conn,
                                 const ConnectionField& conn_star, double alpha) {
  if (alpha == 1.0) return conn;    // bit-identical endpoint
  if (alpha == -1.0) return conn_star;  // bit-identical endpoint
  ConnectionField out;
  out.dim = conn.dim;
  out.gamma.dim = conn.gamma.dim;
  out.gamma.rank = 3;
  out.gamma.variance = kConn;
  out.gamma.fd_step = conn.gamma.fd_step;
  out.gamma.domain = conn.gamma.domain;
  const double a = 0.5 * (1.0 + alpha);
  const double b = 0.5 * (1.0 - alpha);
  out.gamma.eval = [conn, conn_star, a, b](const ChartPoint& p) {
    Tensor g1 = conn(p);
    g1 *= a;
    Tensor g2 = conn_star(p);
    g2 *= b;
    g1 += g2;
    return g1;
  };
  return out;
}

Tensor alpha_torsion(const GeometryBundle& bundle, double alpha, const ChartPoint& p) {
  const double a = 0.5 * (1.0 + alpha);
  const double b = 0.5 * (1.0 - alpha);
  Tensor t = torsion(bundle.nabla, p);
  t *= a;
  Tensor ts = torsion(bundle.nabla_star, p);
  ts *= b;
  t += ts;
  return t;
}

double equiaffine_residual(const ConnectionField& conn, const ChartField& g_field,
                           const ChartField& lambda_field, const ChartPoint& p,
                           double base) {
  const int n = conn.dim;
  double base_eff = base;
  if (base_eff <= 0.0) base_eff = g_field.fd_step;
  if (base_eff <= 0.0) base_eff = default_fd_base();

  positive_volume(lambda_field, p);

  // ∂_i log λ by central differences on the stencil.
  std::vector<double> dloglambda(n, 0.0);
  for (int i = 0; i < n; ++i) {
    const double h = fd_step_for(base_eff, p[i]);
    ChartPoint plus = p;
    ChartPoint minus = p;
    plus[i] += h;
    minus[i] -= h;
    const double lp = positive_volume(lambda_field, plus);
    const double lm = positive_volume(lambda_field, minus);
    dloglambda[i] = (std::log(lp) - std::log(lm)) / (2.0 * h);
  }

  // Condition A: Tr2(Γ)_i = ∂_i log λ.
  const Tensor gamma = conn(p);
  double res_a = 0.0;
  for (int i = 0; i < n; ++i) {
    double tr = 0.0;
    for (int k = 0; k < n; ++k) tr += gamma(k, k, i);
    res_a = std::max(res_a, std::abs(dloglambda[i] - tr));
  }

  // Condition B: Tr2(K)_i = 2 ∂_i log(√|g|/λ), with K the difference tensor
  // against the metric dual of the connection.
  const MetricAtPoint m = metric_at(g_field, p);
  const Tensor dg = metric_derivative(g_field, p, base_eff);
  const Tensor c = nonmetricity_components(m.g, dg, gamma);
  const Tensor dual = dual_components(m.g_inv, gamma, c);
  const Tensor dlogvol = log_sqrt_det_gradient_direct(g_field, p, base_eff);
  double res_b = 0.0;
  for (int i = 0; i < n; ++i) {
    double tr_k = 0.0;
    for (int k = 0; k < n; ++k) tr_k += dual(k, k, i) - gamma(k, k, i);
    const double target = 2.0 * (dlogvol(i) - dloglambda[i]);
    res_b = std::max(res_b, std::abs(tr_k - target));
  }

  return std::max(res_a, res_b);
}

GeometryBundle statistical_pair_from_cubic(const ChartField& g_field,
                                           const ChartField& c_field, CubicMode mode,
                                           const std::string& name) {
  if (g_field.dim != c_field.dim) {
    throw DimensionMismatch("metric and cubic fields disagree on dimension: " +
                            std::to_string(g_field.dim) + " vs " +
                            std::to_string(c_field.dim));
  }
  if (c_field.rank != 3) {
    throw DimensionMismatch("cubic field must have rank 3, got " +
                            std::to_string(c_field.rank));
  }

  // Symmetry audit at quasi-random validation points.
  const std::vector<ChartPoint> pts = halton_points(g_field.domain, 20);
  for (const ChartPoint& pt : pts) {
    const Tensor c = c_field.eval(pt);
    const double tol = 1e-10 * std::max(1.0, c.max_abs());
    const int n = c.dim();
    for (int k = 0; k < n; ++k) {
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
          const double asym_last = std::abs(c(k, i, j) - c(k, j, i));
          if (asym_last > tol) {
            std::ostringstream os;
            os << "cubic last-two symmetry violated at slot (" << k << ", " << i << ", "
               << j << "): asymmetry " << asym_last;
            throw CubicSymmetryViolation(os.str());
          }
          if (mode == CubicMode::totally_symmetric) {
            const double asym_first = std::abs(c(k, i, j) - c(i, k, j));
            if (asym_first > tol) {
              std::ostringstream os;
              os << "cubic total symmetry violated at slot (" << k << ", " << i << ", "
                 << j << "): asymmetry " << asym_first;
              throw CubicSymmetryViolation(os.str());
            }
          }
        }
      }
    }
  }

  GeometryBundle bundle;
  bundle.name = name;
  bundle.dim = g_field.dim;
  bundle.kind = (mode == CubicMode::totally_symmetric) ? BundleKind::statistical
                                                       : BundleKind::quasi_statistical;
  bundle.g = g_field;
  bundle.domain = g_field.domain;
  bundle.fd_step = g_field.fd_step;

  // Primal: the unique torsion-free connection with ∇g = C, obtained by the
  // cyclic Christoffel-type solve applied to ∂g − C.
  auto primal_eval = [g_field, c_field](const ChartPoint& p) {
    const MetricAtPoint m = metric_at(g_field, p);
    Tensor d = metric_derivative(g_field, p, 0.0);
    d -= c_field.eval(p);
    return levi_civita_components(m.g_inv, d);
  };

  bundle.nabla.dim = g_field.dim;
  bundle.nabla.gamma.dim = g_field.dim;
  bundle.nabla.gamma.rank = 3;
  bundle.nabla.gamma.variance = kConn;
  bundle.nabla.gamma.fd_step = g_field.fd_step;
  bundle.nabla.gamma.domain = g_field.domain;
  bundle.nabla.gamma.eval = primal_eval;

  bundle.nabla_star.dim = g_field.dim;
  bundle.nabla_star.gamma.dim = g_field.dim;
  bundle.nabla_star.gamma.rank = 3;
  bundle.nabla_star.gamma.variance = kConn;
  bundle.nabla_star.gamma.fd_step = g_field.fd_step;
  bundle.nabla_star.gamma.domain = g_field.domain;
  bundle.nabla_star.gamma.eval = [g_field, c_field, primal_eval](const ChartPoint& p) {
    const MetricAtPoint m = metric_at(g_field, p);
    return dual_components(m.g_inv, primal_eval(p), c_field.eval(p));
  };

  return bundle;
}

void validate_bundle(const GeometryBundle& bundle, const std::vector<ChartPoint>& points,
                     double tol) {
  for (const ChartPoint& pt : points) {
    const MetricAtPoint m = metric_at(bundle.g, pt);
    const Tensor dg = metric_derivative(bundle.g, pt, bundle.fd_step);
    const Tensor gamma = bundle.nabla(pt);
    const Tensor gamma_star = bundle.nabla_star(pt);
    const int n = bundle.dim;

    const double scale =
        std::max({1.0, dg.max_abs(), m.g.max_abs() * gamma.max_abs(),
                  m.g.max_abs() * gamma_star.max_abs()});

    // Duality split: ∂_k g_ij = g_mi Γ^m_jk + g_mj Γ*^m_ik.
    double res = 0.0;
    for (int k = 0; k < n; ++k) {
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
          double s = dg(k, i, j);
          for (int mm = 0; mm < n; ++mm) {
            s -= m.g(mm, i) * gamma(mm, j, k) + m.g(mm, j) * gamma_star(mm, i, k);
          }
          res = std::max(res, std::abs(s));
        }
      }
    }
    if (res > tol * scale) {
      std::ostringstream os;
      os << "duality split residual " << res << " exceeds tolerance at a validation point";
      throw ValidationError(os.str());
    }

    const double conn_scale = std::max({1.0, gamma.max_abs(), gamma_star.max_abs()});
    const Tensor t = torsion_components(gamma);
    const Tensor t_star = torsion_components(gamma_star);

    switch (bundle.kind) {
      case BundleKind::statistical: {
        if (t.max_abs() > tol * conn_scale) {
          throw ValidationError("primal torsion nonzero on a statistical bundle");
        }
        if (t_star.max_abs() > tol * conn_scale) {
          throw ValidationError("dual torsion nonzero on a statistical bundle");
        }
        const Tensor c = nonmetricity_components(m.g, dg, gamma);
        double asym = 0.0;
        for (int k = 0; k < n; ++k) {
          for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) {
              asym = std::max(asym, std::abs(c(k, i, j) - c(i, k, j)));
            }
          }
        }
        if (asym > tol * std::max(1.0, c.max_abs())) {
          throw ValidationError("cubic total symmetry violated on a statistical bundle");
        }
        break;
      }
      case BundleKind::quasi_statistical: {
        if (t.max_abs() > tol * conn_scale) {
          throw ValidationError("primal torsion nonzero on a quasi-statistical bundle");
        }
        break;
      }
      case BundleKind::pre_statistical: {
        Tensor diff = t;
        diff -= t_star;
        if (diff.max_abs() > tol * conn_scale) {
          throw ValidationError("torsion equality violated on a pre-statistical bundle");
        }
        break;
      }
      case BundleKind::general:
        break;
    }
  }
}

}  // namespace igcurv
