#pragma once

/// \file zoo.hpp
/// \brief Built-in geometry bundles (Gaussian family, sphere, Euclidean,
///        diagonal cosmological metric), randomized bundle generators, the
///        JSON manifold descriptor loader, and equiaffine test cases.
///
/// Descriptor format: docs/manifold_spec.md.

#include <cstdint>

#include "igcurv/connections.hpp"

namespace igcurv {

// ---------------------------------------------------------------------------
// Built-in families.
// ---------------------------------------------------------------------------

/// Gaussian location-scale family in the (μ, σ) chart, μ ∈ [−1, 1],
/// σ ∈ [0.5, 2]. Metric and cubic form are computed by Gauss–Hermite
/// expectation of the log-density derivatives (64 nodes); ∇ is the flat
/// exponential-family connection, ∇* its metric dual. Kind: statistical.
GeometryBundle gaussian_family();

/// Round sphere of the given radius in polar coordinates (θ, φ) with
/// θ ∈ [0.1, π − 0.1]; Levi-Cività self-dual pair. Throws NonpositiveParameter
/// if radius ≤ 0. Kind: statistical (C = 0).
GeometryBundle sphere(double radius = 1.0);

/// Flat Euclidean space of dimension n (2 ≤ n ≤ 4) on [−1, 1]ⁿ, identity
/// metric, zero connection coefficients. Throws DimensionMismatch outside the
/// supported range. Kind: statistical (C = 0).
GeometryBundle euclidean(int n);

/// Diagonal cosmological-form metric on t ∈ [−1, 1], dim 4, signature
/// (−,+,+,+): g = diag(−1, a(t)², a(t)², a(t)²) with a(t) = 1 + t/4.
/// Levi-Cività pair; |g| denotes the absolute determinant. Kind: statistical.
GeometryBundle diagonal_cosmo();

// ---------------------------------------------------------------------------
// Randomized bundles.
// ---------------------------------------------------------------------------

/// Random geometry of the requested kind and dimension (2 ≤ dim ≤ 4),
/// bit-identical for a given (kind, dim, seed):
///  - metric g = A(x)·A(x)ᵀ + 2I with A affine in x, entries U[−0.3, 0.3];
///  - cubic field: degree-2 polynomial coefficients U[−0.5, 0.5], totally
///    symmetric for `statistical`, only last-two symmetric for
///    `quasi_statistical`;
///  - domain [−1, 1]^dim.
/// Draws are retried (fresh sub-seed) if the metric degenerates anywhere on a
/// probe grid; throws GenerationFailure after 10 attempts.
GeometryBundle random_bundle(BundleKind kind, int dim, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Descriptor loading.
// ---------------------------------------------------------------------------

/// Build a bundle from a JSON manifold descriptor (docs/manifold_spec.md).
/// Throws ParseError with a line/position message for malformed JSON and
/// ValidationError naming the violated invariant — e.g. "metric symmetry",
/// "metric invertibility", "cubic last-two symmetry" (with the offending index
/// triple and magnitude), "cubic total symmetry", "domain ordering",
/// "dimension".
GeometryBundle load_spec(const std::string& json_text);

/// load_spec over a file's contents; ParseError if unreadable.
GeometryBundle load_spec_file(const std::string& path);

/// Resolve a manifold name as accepted by the CLI:
///   gaussian_family | sphere[:r] | euclidean[:n] | diagonal_cosmo |
///   random:<kind>:<dim>:<seed> | path to a JSON descriptor file.
/// Throws UnknownName with the list of valid forms.
GeometryBundle manifold_by_name(const std::string& name);

// ---------------------------------------------------------------------------
// Quadrature.
// ---------------------------------------------------------------------------

/// Gauss–Hermite nodes/weights for ∫ f(t)·e^{−t²} dt ≈ Σ w_i f(t_i), computed
/// by the symmetric-tridiagonal (Golub–Welsch) eigen decomposition.
struct GaussHermiteRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};
const GaussHermiteRule& gauss_hermite_rule(int n);

// ---------------------------------------------------------------------------
// Equiaffine test cases.
// ---------------------------------------------------------------------------

/// A bundle together with a parallel-volume candidate λ = e^φ for its primal
/// connection.
struct EquiaffineCase {
  std::string name;
  GeometryBundle bundle;
  ChartField lambda;      ///< λ(x) > 0
  bool torsion_free = true;
};

/// Constructed equiaffine cases (torsion-free and torsional, dims 2–3,
/// including λ = √|g| Levi-Cività instances). The primal connection of each
/// case parallelizes λ·dx¹∧…∧dxⁿ by construction.
std::vector<EquiaffineCase> equiaffine_cases(int count = 20, std::uint64_t seed = 7);

}  // namespace igcurv
