#pragma once

/// \file connections.hpp
/// \brief Affine connection fields, geometry bundles (metric + dual pair),
///        and all pointwise connection constructions: Levi-Civita,
///        nonmetricity, torsion, dual/average/α-connections, difference
///        tensor, traces, and parallel-volume (equiaffine) diagnostics.
///
/// Slot conventions (docs/conventions.md): Γ[k][i][j] stores
/// ∇_{∂_j}∂_i = Γ^k_{ij}∂_k — the derivative direction is the LAST slot.
/// The cubic (nonmetricity) tensor C[k][i][j] = (∇_{∂_k}g)(∂_i,∂_j) puts the
/// direction FIRST and is always symmetric in its last two slots.

#include <cstdint>
#include <string>

#include "igcurv/chart.hpp"
#include "igcurv/types.hpp"

namespace igcurv {

/// A connection as a rank-3 field Γ[k][i][j] with variance (upper,lower,lower).
struct ConnectionField {
  int dim = 0;
  ChartField gamma;

  Tensor operator()(const ChartPoint& p) const { return gamma.eval(p); }
};

/// Classification of a metric/dual-pair bundle.
enum class BundleKind { general, pre_statistical, statistical, quasi_statistical };

std::string to_string(BundleKind k);

/// A (pseudo-)Riemannian metric with a dual pair of connections over one chart.
/// The dual connection always satisfies the metric-compatibility split
/// ∂_k g_ij = g_mi Γ^m_{jk} + g_mj Γ*^m_{ik} at every sampled point.
struct GeometryBundle {
  std::string name;
  int dim = 0;
  BundleKind kind = BundleKind::general;
  ChartField g;
  ConnectionField nabla;
  ConnectionField nabla_star;
  Box domain;
  /// FD step base for all derived evaluations; 0 means the default rule.
  double fd_step = 0.0;
  /// Extra residual allowance for identities that compare the supplied
  /// connection fields against finite-difference metric derivatives.  Zero
  /// when the connections were derived from the sampled metric (they agree to
  /// rounding); set to the differential tolerance when the connections are
  /// independent closed forms, whose agreement with FD data is limited by
  /// truncation of the metric derivatives.
  double conn_data_tol = 0.0;
};

/// Cubic-field symmetry accepted by the bundle builder.
enum class CubicMode { symmetric_last_two, totally_symmetric };

// ---------------------------------------------------------------------------
// Pointwise component algebra (pure functions of already-evaluated tensors).
// ---------------------------------------------------------------------------

/// Levi-Civita coefficients from the inverse metric and dg[k][i][j] = ∂_k g_ij:
/// g_il Γ^l_{jk} = ½(∂_k g_ij + ∂_j g_ik − ∂_i g_jk).
Tensor levi_civita_components(const Tensor& g_inv, const Tensor& dg);

/// C[k][i][j] = dg[k][i][j] − g_mi Γ^m_{jk} − g_mj Γ^m_{ik}.
Tensor nonmetricity_components(const Tensor& g, const Tensor& dg, const Tensor& gamma);

/// T[i][k][l] = Γ^i_{lk} − Γ^i_{kl} (antisymmetric in k,l).
Tensor torsion_components(const Tensor& gamma);

/// Γ*[m][k][i] = Γ[m][k][i] + g^{mj} C[i][j][k].
Tensor dual_components(const Tensor& g_inv, const Tensor& gamma, const Tensor& C);

/// K = Γ* − Γ componentwise.
Tensor difference_components(const Tensor& gamma, const Tensor& gamma_star);

/// Right trace Tr1(A)[i] = Σ_k A[k][i][k] of a (1,2) tensor.
Tensor trace_right(const Tensor& a);

/// Left trace Tr2(A)[i] = Σ_k A[k][k][i] of a (1,2) tensor.
Tensor trace_left(const Tensor& a);

/// Symmetrize the two lower slots of a (1,2) tensor.
Tensor symmetrize_lower(const Tensor& a);

// ---------------------------------------------------------------------------
// Field-level operations.
// ---------------------------------------------------------------------------

/// Levi-Civita coefficients of the metric at p (uses FD of g).
Tensor levi_civita(const ChartField& g_field, const ChartPoint& p, double base = 0.0);

/// The Levi-Civita connection as a field.
ConnectionField levi_civita_field(const ChartField& g_field);

/// Nonmetricity (∇g) of a connection at p.
Tensor nonmetricity(const ChartField& g_field, const ConnectionField& conn,
                    const ChartPoint& p, double base = 0.0);

/// Torsion of a connection at p.
Tensor torsion(const ConnectionField& conn, const ChartPoint& p);

/// The dual connection as a field (metric-compatibility split).
ConnectionField dual_connection(const ChartField& g_field, const ConnectionField& conn,
                                double base = 0.0);

/// K(X,Y) = ∇*_X Y − ∇_X Y at p.
Tensor difference_tensor(const ConnectionField& conn, const ConnectionField& conn_star,
                         const ChartPoint& p);

/// Average connection ∇⁰ = ½(∇ + ∇*) as a field.
ConnectionField average_connection(const ConnectionField& conn,
                                   const ConnectionField& conn_star);

/// α-connection ∇^α = (1+α)/2 ∇ + (1−α)/2 ∇* as a field.
ConnectionField alpha_connection(const ConnectionField& conn,
                                 const ConnectionField& conn_star, double alpha);

/// T^α = (1+α)/2 T + (1−α)/2 T* at p.
Tensor alpha_torsion(const GeometryBundle& bundle, double alpha, const ChartPoint& p);

/// Parallel-volume residual at p: the larger of the two equivalent conditions
/// for ∇(λ dx¹∧…∧dxⁿ) = 0,
///   max_i |∂_i log λ − Tr2(Γ)_i|   and   max_i |Tr2(K)_i − 2 ∂_i log(√|g|/λ)|
/// (K is the difference tensor against the dual computed from g). Zero to FD
/// truncation iff the connection parallelizes the volume form. Throws
/// NonpositiveVolume if λ ≤ 0 on the stencil.
double equiaffine_residual(const ConnectionField& conn, const ChartField& g_field,
                           const ChartField& lambda_field, const ChartPoint& p,
                           double base = 0.0);

/// Build a dual-pair bundle from a metric field and a cubic field: the primal
/// connection is the unique torsion-free connection with ∇g = C (cyclic
/// Christoffel-type solve), and the dual comes from the compatibility split.
/// A totally symmetric cubic yields a statistical pair (∇ = LC − ½K̂ with K̂
/// the metric-raised cubic, ∇* torsion-free too); a merely last-two-symmetric
/// cubic yields a quasi-statistical pair (all torsion lands in ∇*). Throws
/// CubicSymmetryViolation when the cubic lacks the symmetry the mode requires
/// (checked at validation points).
GeometryBundle statistical_pair_from_cubic(const ChartField& g_field,
                                           const ChartField& c_field, CubicMode mode,
                                           const std::string& name = "from-cubic");

/// Validate a bundle's defining residuals (duality split, kind-specific
/// torsion/symmetry) at `points`; throws ValidationError on violation.
void validate_bundle(const GeometryBundle& bundle, const std::vector<ChartPoint>& points,
                     double tol = 1e-9);

}  // namespace igcurv
