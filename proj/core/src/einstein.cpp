#include "igcurv/einstein.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

namespace igcurv {

namespace {

double max_abs_diff(const Tensor& a, const Tensor& b) {
  double m = 0.0;
  const auto& da = a.data();
  const auto& db = b.data();
  for (std::size_t i = 0; i < da.size(); ++i) m = std::max(m, std::abs(da[i] - db[i]));
  return m;
}

Tensor add_scaled(const Tensor& base_t, const Tensor& add, double factor) {
  Tensor out = base_t;
  Tensor t = add;
  t *= factor;
  out += t;
  return out;
}

// ∇_h g^{ls} = −g^{lp} g^{sq} (∇_h g)_{pq}; with C the primal nonmetricity this
// is the primal covariant derivative of the inverse metric.
Tensor dginv_from_nonmetricity(const Tensor& ginv, const Tensor& C) {
  const int n = ginv.dim();
  Tensor out(3, n, {Variance::lower, Variance::upper, Variance::upper, Variance::lower});
  for (int h = 0; h < n; ++h) {
    for (int l = 0; l < n; ++l) {
      for (int s = 0; s < n; ++s) {
        double acc = 0.0;
        for (int p = 0; p < n; ++p) {
          for (int q = 0; q < n; ++q) acc += ginv(l, p) * ginv(s, q) * C(h, p, q);
        }
        out(h, l, s) = -acc;
      }
    }
  }
  return out;
}

// out_j = Σ_{i,s} g^{is} D(i,j,s): the raised-index divergence of a rank-2
// covariant derivative D(i,j,k) = (∇_k A)_{ij}.
Tensor raised_divergence(const Tensor& ginv, const Tensor& D) {
  const int n = ginv.dim();
  Tensor out(1, n, kAllLower);
  for (int j = 0; j < n; ++j) {
    double acc = 0.0;
    for (int i = 0; i < n; ++i) {
      for (int s = 0; s < n; ++s) acc += ginv(i, s) * D(i, j, s);
    }
    out(j) = acc;
  }
  return out;
}

DivergenceReport report_from(const std::string& name, const Tensor& lhs,
                             const Tensor& rhs, double extra_scale) {
  DivergenceReport rep;
  rep.name = name;
  rep.lhs_norm = lhs.max_abs();
  rep.rhs_norm = rhs.max_abs();
  const double scale = std::max({rep.lhs_norm, rep.rhs_norm, extra_scale});
  rep.residual = relative_residual(max_abs_diff(lhs, rhs), scale);
  return rep;
}

}  // namespace

EinsteinValue einstein_from_jet(const GeometryJet& jet, Conn which) {
  EinsteinValue out;
  const Tensor& ric = jet.ricci_of(which);
  out.ricci_sym = symmetrize2(ric);
  out.scalar = trace_with_inverse(jet.ginv, ric);
  out.G = add_scaled(out.ricci_sym, jet.g, -0.5 * out.scalar);
  return out;
}

EinsteinValue einstein_tensor(const GeometryBundle& bundle, Conn which,
                              const ChartPoint& p, double base) {
  const GeometryJet jet(bundle, p, base);
  return einstein_from_jet(jet, which);
}

HValue h_tensor(const GeometryJet& jet) {
  HValue out;
  out.kcal = kcal_tensor(jet.K);
  out.kcal_scalar = trace_with_inverse(jet.ginv, out.kcal);
  out.H = add_scaled(symmetrize2(out.kcal), jet.g, -0.5 * out.kcal_scalar);
  return out;
}

EinsteinValue alpha_einstein_blend(const GeometryJet& jet, double alpha) {
  const double a = 0.5 * (1.0 + alpha);
  const double b = 0.5 * (1.0 - alpha);
  const EinsteinValue e_primal = einstein_from_jet(jet, Conn::primal);
  const EinsteinValue e_dual = einstein_from_jet(jet, Conn::dual);
  const HValue h = h_tensor(jet);
  const AlphaRicci ar = alpha_ricci(jet, alpha);

  EinsteinValue out;
  out.ricci_sym = symmetrize2(ar.ricci);
  out.scalar = ar.scalar;
  Tensor g_blend = e_primal.G;
  g_blend *= a;
  g_blend = add_scaled(g_blend, e_dual.G, b);
  g_blend = add_scaled(g_blend, h.H, a * b);
  out.G = g_blend;
  return out;
}

EinsteinValue alpha_einstein_direct(const GeometryBundle& bundle, double alpha,
                                    const ChartPoint& p, double base) {
  const GeometryJet jet(bundle, p, base);
  const double a = 0.5 * (1.0 + alpha);
  const double b = 0.5 * (1.0 - alpha);
  Tensor gamma_alpha = jet.gamma;
  gamma_alpha *= a;
  gamma_alpha = add_scaled(gamma_alpha, jet.gamma_star, b);
  Tensor dgamma_alpha = jet.dgamma;
  dgamma_alpha *= a;
  dgamma_alpha = add_scaled(dgamma_alpha, jet.dgamma_star, b);

  EinsteinValue out;
  const Tensor ric = ricci_from_riemann(riemann_components(gamma_alpha, dgamma_alpha));
  out.ricci_sym = symmetrize2(ric);
  out.scalar = trace_with_inverse(jet.ginv, ric);
  out.G = add_scaled(out.ricci_sym, jet.g, -0.5 * out.scalar);
  return out;
}

double alpha_einstein_residual(const GeometryBundle& bundle, double alpha,
                               const ChartPoint& p, double base) {
  const GeometryJet jet(bundle, p, base);
  const EinsteinValue blended = alpha_einstein_blend(jet, alpha);
  const double a = 0.5 * (1.0 + alpha);
  const double b = 0.5 * (1.0 - alpha);
  Tensor gamma_alpha = jet.gamma;
  gamma_alpha *= a;
  gamma_alpha = add_scaled(gamma_alpha, jet.gamma_star, b);
  Tensor dgamma_alpha = jet.dgamma;
  dgamma_alpha *= a;
  dgamma_alpha = add_scaled(dgamma_alpha, jet.dgamma_star, b);
  const Tensor ric = ricci_from_riemann(riemann_components(gamma_alpha, dgamma_alpha));
  const double scalar = trace_with_inverse(jet.ginv, ric);
  const Tensor direct = add_scaled(symmetrize2(ric), jet.g, -0.5 * scalar);
  return relative_residual(max_abs_diff(blended.G, direct),
                           std::max(blended.G.max_abs(), direct.max_abs()));
}

namespace {

// Shared machinery for the divergence identities: the stencil, the center
// fields, and the finite-difference derivatives of the derived fields.
struct DivergenceWork {
  explicit DivergenceWork(const GeometryBundle& bundle, const ChartPoint& p,
                          double base)
      : st(bundle, p, base), jet(st.center) {
    dG = st.d2_field(
        [](const GeometryJet& j) { return einstein_from_jet(j, Conn::primal).G; });
    dGstar = st.d2_field(
        [](const GeometryJet& j) { return einstein_from_jet(j, Conn::dual).G; });
    G = einstein_from_jet(jet, Conn::primal);
    Gstar = einstein_from_jet(jet, Conn::dual);
    dginv = dginv_from_nonmetricity(jet.ginv, jet.C);
  }

  JetStencil st;
  const GeometryJet& jet;
  EinsteinValue G;
  EinsteinValue Gstar;
  Tensor dG;
  Tensor dGstar;
  Tensor dginv;

  // Σ_{i,s} g^{is} C(s,i,j): the raised primal nonmetricity trace.
  Tensor raised_c() const {
    const int n = jet.dim;
    Tensor out(1, n, kAllLower);
    for (int j = 0; j < n; ++j) {
      double acc = 0.0;
      for (int i = 0; i < n; ++i) {
        for (int s = 0; s < n; ++s) acc += jet.ginv(i, s) * jet.C(s, i, j);
      }
      out(j) = acc;
    }
    return out;
  }

  // Magnitude of the derivative-level data the divergences are computed
  // from.  On flat pairs every curvature term cancels to rounding level, so
  // normalizing by the terms alone would measure noise against noise; the
  // connection-derivative magnitudes keep the ratio honest there.
  double data_scale() const {
    return jet.ginv.max_abs() * jet.g.max_abs() *
           (jet.dgamma.max_abs() + jet.dgamma_star.max_abs());
  }
};

// Formula (1) of the divergence family and its star mirror. star=false gives
//   ∇ⁱG_ij = −½{∇ⁱM_ij + (∇ⁱg_ij)R + (∇_h g^{ls})R_l{}^h{}_{sj}
//             + (∇_j g^{ls})R_ls + (∇_h g^{hs})R*_sj},  M_ij = R*_ij − R_ji,
// and star=true swaps primal and dual throughout. `extra` (may be empty)
// is the dual-torsion correction added as +½·extra_j on the right side.
DivergenceReport divergence_formula_one(const DivergenceWork& w, bool star,
                                        const Tensor* extra) {
  const GeometryJet& jet = w.jet;
  const int n = jet.dim;
  const Tensor& gm = star ? jet.gamma_star : jet.gamma;
  const Tensor& riem = star ? jet.Rstar : jet.R;
  const Tensor& ric = star ? jet.RicStar : jet.Ric;
  const Tensor& ric_other = star ? jet.Ric : jet.RicStar;
  const double scal = trace_with_inverse(jet.ginv, ric);
  const double csign = star ? -1.0 : 1.0;  // C* = −C

  // LHS: raised divergence of the matching Einstein tensor by the matching
  // connection.
  const Tensor& g_center = star ? w.Gstar.G : w.G.G;
  const Tensor& dg_field = star ? w.dGstar : w.dG;
  const Tensor lhs =
      raised_divergence(jet.ginv, covariant_derivative_02(gm, g_center, dg_field));

  // M field and its covariant derivative by the same connection.
  auto m_of = [star](const GeometryJet& j) {
    const int d = j.dim;
    Tensor m(2, d, kAllLower);
    const Tensor& a = star ? j.Ric : j.RicStar;
    const Tensor& b = star ? j.RicStar : j.Ric;
    for (int i = 0; i < d; ++i) {
      for (int jj = 0; jj < d; ++jj) m(i, jj) = a(i, jj) - b(jj, i);
    }
    return m;
  };
  const Tensor dM = w.st.d2_field(m_of);
  const Tensor m_center = m_of(jet);
  const Tensor t1 =
      raised_divergence(jet.ginv, covariant_derivative_02(gm, m_center, dM));

  const Tensor rc = w.raised_c();
  Tensor rhs(1, n, kAllLower);
  double term_scale = t1.max_abs();
  for (int j = 0; j < n; ++j) {
    const double t2 = csign * rc(j) * scal;
    double t3 = 0.0, t4 = 0.0, t5 = 0.0;
    for (int h = 0; h < n; ++h) {
      for (int l = 0; l < n; ++l) {
        for (int s = 0; s < n; ++s) {
          t3 += csign * w.dginv(h, l, s) * riem(l, h, s, j);
        }
      }
    }
    for (int l = 0; l < n; ++l) {
      for (int s = 0; s < n; ++s) t4 += csign * w.dginv(j, l, s) * ric(l, s);
    }
    for (int h = 0; h < n; ++h) {
      for (int s = 0; s < n; ++s) t5 += csign * w.dginv(h, h, s) * ric_other(s, j);
    }
    double val = -0.5 * (t1(j) + t2 + t3 + t4 + t5);
    if (extra != nullptr) val += 0.5 * (*extra)(j);
    rhs(j) = val;
    term_scale = std::max({term_scale, std::abs(t2), std::abs(t3), std::abs(t4),
                           std::abs(t5)});
  }

  const std::string name = star ? "nabla_star_G_star" : "nabla_G";
  return report_from(name, lhs, rhs, std::max(term_scale, w.data_scale()));
}

// Formulas (3)/(4): the cross divergences. cross_star=true gives
//   ∇*ⁱG_ij = ∇*ⁱR_(ij) − ½(∇*ⁱg_ij)R − ½∂_jR,
// cross_star=false the mirrored ∇ⁱG*_ij version.
DivergenceReport divergence_formula_cross(const DivergenceWork& w, bool cross_star) {
  const GeometryJet& jet = w.jet;
  const int n = jet.dim;
  // cross_star: differentiate primal G with the dual connection.
  const Tensor& gm = cross_star ? jet.gamma_star : jet.gamma;
  const Tensor& g_center = cross_star ? w.G.G : w.Gstar.G;
  const Tensor& dg_field = cross_star ? w.dG : w.dGstar;
  const Conn ric_conn = cross_star ? Conn::primal : Conn::dual;
  const double scal = trace_with_inverse(jet.ginv, jet.ricci_of(ric_conn));
  const double csign = cross_star ? -1.0 : 1.0;  // nonmetricity of the acting conn

  const Tensor lhs =
      raised_divergence(jet.ginv, covariant_derivative_02(gm, g_center, dg_field));

  auto ricsym_of = [ric_conn](const GeometryJet& j) {
    return symmetrize2(j.ricci_of(ric_conn));
  };
  const Tensor dRs = w.st.d2_field(ricsym_of);
  const Tensor rs_center = ricsym_of(jet);
  const Tensor t1 =
      raised_divergence(jet.ginv, covariant_derivative_02(gm, rs_center, dRs));
  const Tensor dscal = w.st.d0_field(
      [ric_conn](const GeometryJet& j) { return j.scalar_of(ric_conn); });
  const Tensor rc = w.raised_c();

  Tensor rhs(1, n, kAllLower);
  double term_scale = t1.max_abs();
  for (int j = 0; j < n; ++j) {
    const double t2 = -0.5 * csign * rc(j) * scal;
    const double t3 = -0.5 * dscal(j);
    rhs(j) = t1(j) + t2 + t3;
    term_scale = std::max({term_scale, std::abs(t2), std::abs(t3)});
  }

  const std::string name = cross_star ? "nabla_star_G" : "nabla_G_star";
  return report_from(name, lhs, rhs, std::max(term_scale, w.data_scale()));
}

// The dual-torsion correction entering the starred first formula on
// quasi-statistical bundles.
Tensor quasi_extra_term(const GeometryJet& jet) {
  const int n = jet.dim;
  Tensor out(1, n, kAllLower);
  for (int j = 0; j < n; ++j) {
    double acc = 0.0;
    for (int l = 0; l < n; ++l) {
      for (int s = 0; s < n; ++s) {
        const double gls = jet.ginv(l, s);
        for (int r = 0; r < n; ++r) {
          acc -= gls * jet.RicStar(l, r) * jet.Tstar(r, s, j);
          for (int h = 0; h < n; ++h) {
            acc += gls * jet.Rstar(l, h, r, j) * jet.Tstar(r, h, s);
            acc += gls * jet.Rstar(l, h, r, s) * jet.Tstar(r, j, h);
          }
        }
      }
    }
    out(j) = acc;
  }
  return out;
}

}  // namespace

std::vector<DivergenceReport> einstein_divergence_statistical(
    const GeometryBundle& bundle, const ChartPoint& p, double base) {
  if (bundle.kind != BundleKind::statistical) {
    throw KindMismatch("einstein_divergence_statistical requires a statistical bundle, got " +
                       std::string(to_string(bundle.kind)));
  }
  DivergenceWork w(bundle, p, base);
  std::vector<DivergenceReport> out;
  out.push_back(divergence_formula_one(w, false, nullptr));
  out.push_back(divergence_formula_one(w, true, nullptr));
  out.push_back(divergence_formula_cross(w, true));
  out.push_back(divergence_formula_cross(w, false));
  return out;
}

std::vector<DivergenceReport> einstein_divergence_quasi(const GeometryBundle& bundle,
                                                        const ChartPoint& p,
                                                        double base) {
  if (bundle.kind != BundleKind::quasi_statistical) {
    throw KindMismatch("einstein_divergence_quasi requires a quasi-statistical bundle, got " +
                       std::string(to_string(bundle.kind)));
  }
  DivergenceWork w(bundle, p, base);
  const Tensor extra = quasi_extra_term(w.jet);
  std::vector<DivergenceReport> out;
  out.push_back(divergence_formula_one(w, false, nullptr));
  out.push_back(divergence_formula_one(w, true, &extra));
  out.push_back(divergence_formula_cross(w, true));
  out.push_back(divergence_formula_cross(w, false));
  return out;
}

DivergenceReport scalar_gradient_residual(const GeometryBundle& bundle,
                                          const ChartPoint& p, double base) {
  const JetStencil st(bundle, p, base);
  const GeometryJet& jet = st.center;
  const int n = jet.dim;

  const Tensor lhs = st.d0_field(
      [](const GeometryJet& j) { return j.scalar_of(Conn::primal); });

  const Tensor dRic =
      st.d2_field([](const GeometryJet& j) { return j.Ric; });
  const Tensor dRicStar =
      st.d2_field([](const GeometryJet& j) { return j.RicStar; });
  const Tensor div_ric = raised_divergence(
      jet.ginv, covariant_derivative_02(jet.gamma, jet.Ric, dRic));
  const Tensor div_ric_star = raised_divergence(
      jet.ginv, covariant_derivative_02(jet.gamma, jet.RicStar, dRicStar));
  const Tensor dginv = dginv_from_nonmetricity(jet.ginv, jet.C);

  Tensor rhs(1, n, kAllLower);
  double term_scale = std::max(div_ric.max_abs(), div_ric_star.max_abs());
  for (int k = 0; k < n; ++k) {
    double t3 = 0.0, t4 = 0.0, t5 = 0.0;
    for (int h = 0; h < n; ++h) {
      for (int l = 0; l < n; ++l) {
        for (int j = 0; j < n; ++j) t3 += dginv(h, l, j) * jet.R(l, h, j, k);
      }
    }
    for (int l = 0; l < n; ++l) {
      for (int j = 0; j < n; ++j) t4 += dginv(k, l, j) * jet.Ric(l, j);
    }
    for (int h = 0; h < n; ++h) {
      for (int s = 0; s < n; ++s) t5 += dginv(h, h, s) * jet.RicStar(s, k);
    }
    rhs(k) = div_ric(k) + div_ric_star(k) + t3 + t4 + t5;
    term_scale = std::max({term_scale, std::abs(t3), std::abs(t4), std::abs(t5)});
  }

  // On flat pairs all curvature terms vanish to rounding level; anchor the
  // scale with the connection-derivative magnitudes the route is built from.
  const double data_scale = jet.ginv.max_abs() * jet.g.max_abs() *
                            (jet.dgamma.max_abs() + jet.dgamma_star.max_abs());
  return report_from("scalar_gradient", lhs, rhs, std::max(term_scale, data_scale));
}

DivergenceReport alpha_einstein_divergence(const GeometryBundle& bundle, double alpha,
                                           const ChartPoint& p, double base) {
  const JetStencil st(bundle, p, base);
  const GeometryJet& jet = st.center;
  const double a = 0.5 * (1.0 + alpha);
  const double b = 0.5 * (1.0 - alpha);

  const Tensor dG = st.d2_field(
      [](const GeometryJet& j) { return einstein_from_jet(j, Conn::primal).G; });
  const Tensor dGstar = st.d2_field(
      [](const GeometryJet& j) { return einstein_from_jet(j, Conn::dual).G; });
  const Tensor dH = st.d2_field([](const GeometryJet& j) { return h_tensor(j).H; });
  const Tensor G = einstein_from_jet(jet, Conn::primal).G;
  const Tensor Gstar = einstein_from_jet(jet, Conn::dual).G;
  const Tensor H = h_tensor(jet).H;

  // Direct route: differentiate the blended field with the blended connection.
  Tensor gamma_alpha = jet.gamma;
  gamma_alpha *= a;
  gamma_alpha = add_scaled(gamma_alpha, jet.gamma_star, b);
  Tensor g_alpha = G;
  g_alpha *= a;
  g_alpha = add_scaled(g_alpha, Gstar, b);
  g_alpha = add_scaled(g_alpha, H, a * b);
  Tensor dg_alpha = dG;
  dg_alpha *= a;
  dg_alpha = add_scaled(dg_alpha, dGstar, b);
  dg_alpha = add_scaled(dg_alpha, dH, a * b);
  const Tensor lhs = raised_divergence(
      jet.ginv, covariant_derivative_02(gamma_alpha, g_alpha, dg_alpha));

  // Blend route: the four Einstein divergences plus the H corrections.
  const Tensor div_g = raised_divergence(
      jet.ginv, covariant_derivative_02(jet.gamma, G, dG));
  const Tensor div_g_by_star = raised_divergence(
      jet.ginv, covariant_derivative_02(jet.gamma_star, G, dG));
  const Tensor div_gstar = raised_divergence(
      jet.ginv, covariant_derivative_02(jet.gamma, Gstar, dGstar));
  const Tensor div_gstar_by_star = raised_divergence(
      jet.ginv, covariant_derivative_02(jet.gamma_star, Gstar, dGstar));
  const Tensor div_h = raised_divergence(
      jet.ginv, covariant_derivative_02(jet.gamma, H, dH));
  const Tensor div_h_by_star = raised_divergence(
      jet.ginv, covariant_derivative_02(jet.gamma_star, H, dH));

  Tensor rhs = div_g;
  rhs *= a * a;
  rhs = add_scaled(rhs, div_g_by_star, a * b);
  rhs = add_scaled(rhs, div_gstar, a * b);
  rhs = add_scaled(rhs, div_gstar_by_star, b * b);
  rhs = add_scaled(rhs, div_h, a * b * a);
  rhs = add_scaled(rhs, div_h_by_star, a * b * b);

  return report_from("alpha_divergence_blend", lhs, rhs, 0.0);
}

Tensor effective_stress_energy(const GeometryJet& jet, const Tensor& T_ij,
                               double alpha, double kappa) {
  if (std::abs(1.0 + alpha) < 1e-12) {
    throw AlphaSingular("effective stress-energy is singular at alpha = -1");
  }
  const Tensor Gstar = einstein_from_jet(jet, Conn::dual).G;
  const Tensor H = h_tensor(jet).H;
  Tensor out = T_ij;
  out *= 2.0 / (1.0 + alpha);
  out = add_scaled(out, Gstar, -(1.0 - alpha) / ((1.0 + alpha) * kappa));
  out = add_scaled(out, H, -(1.0 - alpha) / (2.0 * kappa));
  return out;
}

double effective_stress_energy_roundtrip(const GeometryJet& jet, double alpha,
                                         double kappa) {
  const EinsteinValue e_alpha = alpha_einstein_blend(jet, alpha);
  Tensor T = e_alpha.G;
  T *= 1.0 / kappa;
  Tensor rebuilt = effective_stress_energy(jet, T, alpha, kappa);
  rebuilt *= kappa;
  const Tensor G = einstein_from_jet(jet, Conn::primal).G;
  return relative_residual(max_abs_diff(rebuilt, G),
                           std::max(rebuilt.max_abs(), G.max_abs()));
}

}  // namespace igcurv
