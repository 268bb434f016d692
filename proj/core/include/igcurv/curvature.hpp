#pragma once

/// \file curvature.hpp
/// \brief Riemann/Ricci/scalar curvature for arbitrary connections, the shared
///        finite-difference jet, and the curvature decomposition, duality,
///        Bianchi, and α-family identity evaluators.
///
/// Riemann storage (docs/conventions.md): R[m][k][j][i] ⇔ R(∂_j,∂_i)∂_m =
/// R[m][k][j][i]·∂_k, computed from Γ and dΓ[k][m][i][j] = ∂_j Γ^k_{mi} as
///   R[m][k][j][i] = dΓ[k][m][i][j] − dΓ[k][m][j][i]
///                 + Γ^h_{mi}Γ^k_{hj} − Γ^h_{mj}Γ^k_{hi}.
/// Ricci contracts the value slot with the first direction slot:
/// Ric[m][i] = Σ_j R[m][j][j][i].

#include <map>
#include <optional>
#include <string>

#include "igcurv/connections.hpp"

namespace igcurv {

/// Which connection of a bundle an operation acts on.
enum class Conn { primal, dual, average, levi_civita };

// ---------------------------------------------------------------------------
// Pure component algebra (shared by the library and the brute-force oracles).
// ---------------------------------------------------------------------------

/// Riemann components from Γ and dΓ[k][m][i][j] = ∂_j Γ^k_{mi}.
Tensor riemann_components(const Tensor& gamma, const Tensor& dgamma);

/// Ric[m][i] = Σ_j R[m][j][j][i].
Tensor ricci_from_riemann(const Tensor& R);

/// ½(Ric + Ricᵀ).
Tensor symmetrize2(const Tensor& a);

/// g^{ij} A_ij.
double trace_with_inverse(const Tensor& g_inv, const Tensor& a);

/// Lowered curvature RC[x][y][z][v] = g(R(∂_z,∂_v)∂_y, ∂_x) = g_xk R[y][k][z][v].
Tensor riemann_christoffel(const Tensor& g, const Tensor& R);

/// Covariant derivative of a (1,2) tensor A[k][m][i] with dA[k][m][i][j] = ∂_j A:
/// DA[k][m][i][j] = dA + Γ^k_{hj}A^h_{mi} − Γ^h_{mj}A^k_{hi} − Γ^h_{ij}A^k_{mh}.
Tensor covariant_derivative_12(const Tensor& gamma, const Tensor& a, const Tensor& da);

/// Covariant derivative of a (0,2) tensor A[i][j] with dA[i][j][k] = ∂_k A_ij
/// (direction last): DA[i][j][k] = dA − Γ^h_{ik}A_hj − Γ^h_{jk}A_ih.
Tensor covariant_derivative_02(const Tensor& gamma, const Tensor& a, const Tensor& da);

/// K-commutator KK[k][m][j][i] = Σ_l (K^l_{mi}K^k_{lj} − K^l_{mj}K^k_{li}).
Tensor k_commutator(const Tensor& K);

// ---------------------------------------------------------------------------
// The shared jet: every first-derivative quantity at one point, evaluated on
// common FD stencils so algebraic identities are exact in these values.
// ---------------------------------------------------------------------------

/// The dual side of the jet is derived *analytically* from the primal side:
/// Γ* = dual(g, Γ, C) and ∂Γ* is obtained by differentiating the
/// compatibility split through (g, dg, d²g, Γ, dΓ). This makes every
/// identity that mixes primal and dual curvature exact in the jet values
/// rather than limited by a second, independent FD pass.
struct GeometryJet {
  GeometryJet(const GeometryBundle& bundle, const ChartPoint& p, double base = 0.0);

  int dim = 0;
  double base_h = 0.0;
  ChartPoint p;

  Tensor g, ginv;
  Tensor dg;        ///< dg[k][i][j] = ∂_k g_ij
  Tensor d2g;       ///< d2g[x][k][i][j] = ∂_x ∂_k g_ij
  double det_g = 0.0;
  double sqrt_abs_det = 0.0;

  Tensor gamma, gamma_star, gamma0, gamma_lc;
  Tensor dgamma, dgamma_star, dgamma0, dgamma_lc;  ///< dΓ[k][m][i][j] = ∂_j Γ^k_{mi}

  Tensor C, Cstar;       ///< nonmetricity of ∇ and ∇* (C* = −C for a dual pair)
  Tensor K;              ///< Γ* − Γ
  Tensor T, Tstar, T0;   ///< torsions of ∇, ∇*, ∇⁰

  Tensor R, Rstar, R0, Rlc;           ///< Riemann tensors
  Tensor Ric, RicStar, Ric0, Riclc;   ///< Ricci tensors

  /// ∇K and ∇⁰K (covariant derivative of the difference tensor).
  Tensor DK() const;
  Tensor DK0() const;
  /// ∂ of K: dK[k][m][i][j] = dΓ*[k][m][i][j] − dΓ[k][m][i][j].
  Tensor dK() const;
  /// Covariant derivative of the torsion of `of_torsion` by the connection
  /// `by_conn`: DT[k][a][b][x] = (∇_x T)(∂_a,∂_b)^k.
  Tensor DT(Conn of_torsion, Conn by_conn) const;

  const Tensor& gamma_of(Conn c) const;  ///< any of the four connections
  const Tensor& dgamma_of(Conn c) const; ///< any of the four connections
  const Tensor& torsion_of(Conn c) const;
  const Tensor& riemann_of(Conn c) const;
  const Tensor& ricci_of(Conn c) const;
  double scalar_of(Conn c) const;  ///< g^{ij} Ric_ij
};

/// Default stencil spacing when no explicit base step is given.  Derived
/// curvature fields carry the jets' internal FD error floor, so differencing
/// them wants a wider step than a raw chart field: spacing h amplifies that
/// floor by 1/(2h) while contributing O(h²) truncation, and 1e-3 balances the
/// two well below the differential tolerance.
inline constexpr double kStencilOuterBase = 1e-3;

/// Central-difference stencil of full jets: the center plus p ± h·e_axis, for
/// differentiating derived (curvature-level) fields while sharing every inner
/// FD evaluation.  An explicit base step is used for both the inner jets and
/// the stencil spacing (convergence sweeps turn exactly that knob); under the
/// default policy the inner jets use the chart default while the spacing is
/// widened to kStencilOuterBase.
struct JetStencil {
  JetStencil(const GeometryBundle& bundle, const ChartPoint& p, double base = 0.0);

  const GeometryBundle* bundle = nullptr;
  double base_h = 0.0;  ///< resolved base of the inner jets
  GeometryJet center;
  std::vector<double> h_axis;               ///< stencil spacing per axis
  std::vector<std::array<GeometryJet, 2>> nb;  ///< [axis][0]=p−h, [1]=p+h

  /// Central difference of any rank-2 jet functional: d[i][j][k] = ∂_k f_ij
  /// (derivative axis appended last).
  Tensor d2_field(const std::function<Tensor(const GeometryJet&)>& f) const;
  /// Central difference of a rank-3 jet functional, derivative axis last.
  Tensor d3_field(const std::function<Tensor(const GeometryJet&)>& f) const;
  /// Central difference of a rank-≤4 jet functional along ONE axis.
  Tensor d_dir(const std::function<Tensor(const GeometryJet&)>& f, int axis) const;
  /// Central difference of a scalar jet functional: rank-1 gradient.
  Tensor d0_field(const std::function<double(const GeometryJet&)>& f) const;
};

// ---------------------------------------------------------------------------
// Operations.
// ---------------------------------------------------------------------------

/// Riemann tensor of the selected connection at p.
Tensor riemann(const GeometryBundle& bundle, Conn which, const ChartPoint& p,
               double base = 0.0);

/// Ricci data of the selected connection at p.
struct RicciValue {
  Tensor ricci;      ///< R_mi
  Tensor ricci_sym;  ///< ½(R_mi + R_im)
  double scalar = 0.0;
};
RicciValue ricci(const GeometryBundle& bundle, Conn which, const ChartPoint& p,
                 double base = 0.0);

/// Max |R_{wzxy} + R*_{zwxy}| over all quadruples (lowered curvatures of the
/// dual pair), relative to the larger term scale.
double duality_curvature_residual(const GeometryJet& jet);

/// Residuals of the eight curvature split formulas (primal/dual × average/
/// primal derivative basis × difference/sum), keyed by identity id.
std::map<std::string, double> decomposition_residuals(const GeometryJet& jet);

/// Residuals of the Ricci-level split formulas, plus the right-trace-free
/// specializations when Tr1(K) vanishes at the point.
std::map<std::string, double> ricci_decomposition_residuals(const GeometryJet& jet);

/// Cyclic Bianchi residuals for the selected connection (torsion terms kept).
/// `first` is the cyclic covariant-derivative-of-R identity (truncation-
/// limited); `second` is the cyclic curvature/torsion identity (exact in jets).
struct BianchiResiduals {
  double first = 0.0;
  double second = 0.0;
};
BianchiResiduals bianchi_residuals(const GeometryBundle& bundle, Conn which,
                                   const ChartPoint& p, double base = 0.0);

/// Ricci antisymmetry through torsion: residual of
/// R_ij − R_ji = ∇_k T^k_{ji} + (∂_i Γ^k_{jk} − ∂_j Γ^k_{ik}) and of the
/// curvature-trace form R_kj − R_jk + Σ_i R[i][i][jk] = torsion terms.
struct RicciAntisymmetry {
  double torsion_trace_form = 0.0;   ///< connection-trace identity
  double curvature_trace_form = 0.0; ///< cyclic-trace identity
};
RicciAntisymmetry ricci_antisymmetry_residual(const GeometryJet& jet, Conn which);

/// α-Riemann via the blend R^α = (1+α)/2 R + (1−α)/2 R* − (1−α²)/4 KK.
Tensor alpha_riemann_blend(const GeometryJet& jet, double alpha);

/// α-Riemann via direct curvature of the α-connection field.
Tensor alpha_riemann_direct(const GeometryBundle& bundle, double alpha,
                            const ChartPoint& p, double base = 0.0);

/// Relative disagreement of the two α-Riemann routes.
double alpha_riemann_residual(const GeometryBundle& bundle, double alpha,
                              const ChartPoint& p, double base = 0.0);

/// 𝒦[l][j] = −Σ_a KK[a][l][a][j] (the K-quadratic entering the α-Ricci blend).
Tensor kcal_tensor(const Tensor& K);

/// α-Ricci blend value and its residual against the contraction of the direct
/// α-Riemann route.
struct AlphaRicci {
  Tensor ricci;
  Tensor kcal;
  double scalar = 0.0;
};
AlphaRicci alpha_ricci(const GeometryJet& jet, double alpha);
double alpha_ricci_residual(const GeometryBundle& bundle, double alpha,
                            const ChartPoint& p, double base = 0.0);

/// Residual of the α-blended Ricci-antisymmetry identity (the weighted
/// torsion/trace expression for R^α_ij − R^α_ji).
double alpha_ricci_antisymmetry(const GeometryJet& jet, double alpha);

}  // namespace igcurv
