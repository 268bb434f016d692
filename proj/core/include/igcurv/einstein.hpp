#pragma once

/// \file einstein.hpp
/// \brief Einstein tensors for dual-connection geometry: the symmetrized
///        Einstein tensor, its α-family extension, divergence identities for
///        statistical and quasi-statistical bundles, and the effective
///        stress-energy round trip.
///
/// Conventions (docs/conventions.md): G_ij = R_(ij) − ½ g_ij R with
/// R_(ij) = ½(R_ij + R_ji) and R = g^{ij}R_ij — always built from the
/// symmetrized Ricci so G is symmetric for any connection. The raised
/// derivative is ∇ⁱ = g^{is}∇_s taken at the same point.

#include <map>
#include <string>

#include "igcurv/curvature.hpp"

namespace igcurv {

/// Einstein tensor value of one connection at a point.
struct EinsteinValue {
  Tensor ricci_sym;  ///< R_(ij)
  double scalar = 0.0;
  Tensor G;          ///< G_ij
};

/// G of the selected connection, from a ready jet (exact in its values).
EinsteinValue einstein_from_jet(const GeometryJet& jet, Conn which);

/// G of the selected connection at p (throws KindMismatch if `which` requires
/// a dual structure the bundle lacks — every GeometryBundle carries one, so
/// this guards only malformed bundles).
EinsteinValue einstein_tensor(const GeometryBundle& bundle, Conn which,
                              const ChartPoint& p, double base = 0.0);

/// The α-correction pair: 𝒦_ij = −Σ_a KK[a][i][a][j] and
/// H_ij = 𝒦_(ij) − ½ g_ij 𝒦  with 𝒦_(ij) = ½(𝒦_ij + 𝒦_ji), 𝒦 = g^{ij}𝒦_ij.
/// (With this normalization the blend below is the exact Einstein tensor of
/// the α-connection.)
struct HValue {
  Tensor kcal;    ///< 𝒦_ij
  double kcal_scalar = 0.0;
  Tensor H;       ///< H_ij
};
HValue h_tensor(const GeometryJet& jet);

/// α-Einstein via the blend
///   G^α = (1+α)/2 G + (1−α)/2 G* + (1−α²)/4 H.
EinsteinValue alpha_einstein_blend(const GeometryJet& jet, double alpha);

/// α-Einstein assembled directly from the α-Ricci (R^α_(ij) − ½g_ij R^α with
/// R^α from the direct α-connection curvature route).
EinsteinValue alpha_einstein_direct(const GeometryBundle& bundle, double alpha,
                                    const ChartPoint& p, double base = 0.0);

/// Relative disagreement of the two α-Einstein routes.
double alpha_einstein_residual(const GeometryBundle& bundle, double alpha,
                               const ChartPoint& p, double base = 0.0);

/// One divergence-identity check: left/right evaluations and their relative
/// residual (|lhs − rhs| / scale, scale = max term magnitude floored).
struct DivergenceReport {
  std::string name;
  double lhs_norm = 0.0;
  double rhs_norm = 0.0;
  double residual = 0.0;
};

/// The four divergence formulas for statistical bundles:
///   (1) ∇ⁱG_ij expressed through dual-curvature and nonmetricity terms,
///   (2) the star-swapped form,
///   (3) ∇*ⁱG_ij = ∇*ⁱR_(ij) − ½(∇*ⁱg_ij)R − ½∇*_jR,
///   (4) the primal/star mirror of (3).
/// Throws KindMismatch unless bundle.kind is statistical (or the bundle is a
/// Levi-Civita special case of one).
std::vector<DivergenceReport> einstein_divergence_statistical(
    const GeometryBundle& bundle, const ChartPoint& p, double base = 0.0);

/// The quasi-statistical versions: (1),(3),(4) as above, (2) carries the
/// extra dual-torsion contraction terms. Throws KindMismatch unless
/// bundle.kind is quasi_statistical.
std::vector<DivergenceReport> einstein_divergence_quasi(
    const GeometryBundle& bundle, const ChartPoint& p, double base = 0.0);

/// Scalar-gradient identity
///   ∇_k R = ∇ʰR_hk + ∇ʰR*_hk + (∇_h g^{lj})R_l{}^h{}_jk
///           + (∇_k g^{lj})R_lj + (∇_h g^{hs})R*_sk,
/// reported as a relative residual (reduces to ∇_kR = 2∇ʰR_hk for
/// Levi-Civita bundles).
DivergenceReport scalar_gradient_residual(const GeometryBundle& bundle,
                                          const ChartPoint& p, double base = 0.0);

/// Divergence of the α-Einstein family under the α-connection, via the exact
/// operator blend ∇^α = (1+α)/2 ∇ + (1−α)/2 ∇*:
///   ∇^αⁱG^α_ij = ((1+α)/2)² ∇ⁱG_ij + (1−α²)/4 (∇*ⁱG_ij + ∇ⁱG*_ij)
///              + ((1−α)/2)² ∇*ⁱG*_ij
///              + (1−α²)/4 [ (1+α)/2 ∇ⁱH_ij + (1−α)/2 ∇*ⁱH_ij ].
DivergenceReport alpha_einstein_divergence(const GeometryBundle& bundle,
                                           double alpha, const ChartPoint& p,
                                           double base = 0.0);

/// Effective stress-energy of the α-family field equation G^α = κ·T^eff-form:
///   T^eff_ij = (2/(1+α)) T_ij
///            − (1/κ)[ ((1−α)/(1+α)) G*_ij + ((1−α)/2) H_ij ].
/// Throws AlphaSingular at α = −1.
Tensor effective_stress_energy(const GeometryJet& jet, const Tensor& T_ij,
                               double alpha, double kappa = 1.0);

/// Round trip: set T := G^α/κ, rebuild κ·T^eff, compare against G (the primal
/// Einstein tensor). Returns the relative residual.
double effective_stress_energy_roundtrip(const GeometryJet& jet, double alpha,
                                         double kappa = 1.0);

}  // namespace igcurv
