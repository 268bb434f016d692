#pragma once

/// \file chart.hpp
/// \brief Chart points, axis-aligned domains, tensor-valued fields, central
///        finite differences, and pointwise metric linear algebra.
///
/// Finite-difference policy (see docs/conventions.md): first derivatives are
/// central differences (F(p+h·e) − F(p−h·e)) / 2h with per-axis step
/// h = base·max(1, |x_axis|); the base is 1e-4 by default, overridable per
/// field (`fd_step`) or globally via the IGCURV_DEFAULT_H environment
/// variable. Second derivatives are nested central differences with the same
/// step. Every stencil point must stay inside the declared domain.

#include <functional>
#include <vector>

#include "igcurv/types.hpp"

namespace igcurv {

/// Chart coordinates x = (x^0, ..., x^{n-1}).
using ChartPoint = std::vector<double>;

/// Axis-aligned box domain of a chart.
struct Box {
  std::vector<double> lo;
  std::vector<double> hi;

  int dim() const { return static_cast<int>(lo.size()); }
  bool contains(const ChartPoint& p) const;
  /// Point mapped from the unit cube with a fractional inset per side.
  ChartPoint from_unit(const std::vector<double>& u, double inset) const;
};

/// A tensor-valued field over one chart: a pure evaluator plus FD metadata.
struct ChartField {
  int dim = 0;
  int rank = 0;
  std::array<Variance, Tensor::kMaxRank> variance = kAllLower;
  std::function<Tensor(const ChartPoint&)> eval;
  /// FD step base; 0 means the default rule (1e-4 or IGCURV_DEFAULT_H).
  double fd_step = 0.0;
  Box domain;

  Tensor operator()(const ChartPoint& p) const { return eval(p); }
};

/// The process-wide default FD base step (IGCURV_DEFAULT_H or 1e-4).
double default_fd_base();

/// Per-axis FD step h = base·max(1, |x_axis|); base 0 selects the default.
double fd_step_for(double base, double x_axis);

/// Central difference ∂_axis F at p. Throws DomainEscape if a stencil point
/// leaves the field's domain. `base` 0 uses the field's own step rule.
Tensor partial_derivative(const ChartField& field, const ChartPoint& p, int axis,
                          double base = 0.0);

/// Nested central second difference ∂_a ∂_b F at p (same step both levels).
Tensor second_partial(const ChartField& field, const ChartPoint& p, int a, int b,
                      double base = 0.0);

/// Pointwise metric data: inverse, determinant, volume density, signature.
struct MetricAtPoint {
  Tensor g;              ///< rank-2 lower, symmetric
  Tensor g_inv;          ///< rank-2 upper
  double det_g = 0.0;    ///< signed determinant
  double sqrt_abs_det = 0.0;
  std::vector<int> signature;  ///< eigenvalue signs, descending eigenvalues
};

/// Invert and classify the metric at a point. Throws SingularMetric when
/// |det| < 1e-14·scale, AsymmetricMetric when symmetry is violated beyond
/// 1e-12 relative.
MetricAtPoint metric_at(const ChartField& g_field, const ChartPoint& p);

/// Same checks for an already-evaluated metric tensor.
MetricAtPoint metric_from_components(const Tensor& g);

/// ∂_i log √|g| by the contraction route ½ g^{pq} ∂_i g_pq (rank-1 lower).
Tensor log_sqrt_det_gradient(const ChartField& g_field, const ChartPoint& p,
                             double base = 0.0);

/// ∂_i log √|g| by direct central differencing of the log-volume field.
/// Agreement with the contraction route is an O(h²) identity.
Tensor log_sqrt_det_gradient_direct(const ChartField& g_field, const ChartPoint& p,
                                    double base = 0.0);

/// Deterministic quasi-random points (Halton, bases 2/3/5/7) inside the box,
/// inset a fraction of the width from each side.
std::vector<ChartPoint> halton_points(const Box& box, int count, double inset = 0.05);

}  // namespace igcurv
