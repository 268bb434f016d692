#include "igcurv/chart.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <sstream>
#include <string>

namespace igcurv {

namespace {

std::string format_point(const ChartPoint& p) {
  std::ostringstream os;
  os << "(";
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (i) os << ", ";
    os << p[i];
  }
  os << ")";
  return os.str();
}

std::string format_box(const Box& box) {
  std::ostringstream os;
  for (int i = 0; i < box.dim(); ++i) {
    if (i) os << " x ";
    os << "[" << box.lo[i] << ", " << box.hi[i] << "]";
  }
  return os.str();
}

void require_inside(const ChartField& field, const ChartPoint& q) {
  if (field.domain.dim() != field.dim) return;  // no declared domain: unbounded
  if (!field.domain.contains(q)) {
    throw DomainEscape("stencil point " + format_point(q) +
                       " escapes the chart domain " + format_box(field.domain));
  }
}

Tensor eval_at(const ChartField& field, const ChartPoint& q) {
  require_inside(field, q);
  return field.eval(q);
}

double resolve_base(const ChartField& field, double base) {
  if (base > 0.0) return base;
  if (field.fd_step > 0.0) return field.fd_step;
  return default_fd_base();
}

void check_axis(const ChartField& field, const ChartPoint& p, int axis) {
  if (static_cast<int>(p.size()) != field.dim) {
    throw DimensionMismatch("field of dimension " + std::to_string(field.dim) +
                            " evaluated at a point of dimension " +
                            std::to_string(p.size()));
  }
  if (axis < 0 || axis >= field.dim) {
    throw DimensionMismatch("derivative axis " + std::to_string(axis) +
                            " out of range for dimension " + std::to_string(field.dim));
  }
}

double radical_inverse(int base, int index) {
  double f = 1.0;
  double r = 0.0;
  while (index > 0) {
    f /= base;
    r += f * (index % base);
    index /= base;
  }
  return r;
}

}  // namespace

bool Box::contains(const ChartPoint& p) const {
  if (static_cast<int>(p.size()) != dim()) return false;
  for (int i = 0; i < dim(); ++i) {
    if (p[i] < lo[i] || p[i] > hi[i]) return false;
  }
  return true;
}

ChartPoint Box::from_unit(const std::vector<double>& u, double inset) const {
  if (static_cast<int>(u.size()) != dim()) {
    throw DimensionMismatch("unit point of dimension " + std::to_string(u.size()) +
                            " mapped into a box of dimension " + std::to_string(dim()));
  }
  ChartPoint p(u.size(), 0.0);
  for (int i = 0; i < dim(); ++i) {
    const double t = inset + (1.0 - 2.0 * inset) * u[i];
    p[i] = lo[i] + (hi[i] - lo[i]) * t;
  }
  return p;
}

double default_fd_base() {
  static const double value = [] {
    if (const char* env = std::getenv("IGCURV_DEFAULT_H")) {
      char* end = nullptr;
      const double parsed = std::strtod(env, &end);
      if (end != env && parsed > 0.0) return parsed;
    }
    return 1e-4;
  }();
  return value;
}

double fd_step_for(double base, double x_axis) {
  const double b = base > 0.0 ? base : default_fd_base();
  return b * std::max(1.0, std::abs(x_axis));
}

Tensor partial_derivative(const ChartField& field, const ChartPoint& p, int axis,
                          double base) {
  check_axis(field, p, axis);
  const double h = fd_step_for(resolve_base(field, base), p[axis]);
  ChartPoint plus = p;
  ChartPoint minus = p;
  plus[axis] += h;
  minus[axis] -= h;
  Tensor out = eval_at(field, plus);
  out -= eval_at(field, minus);
  out *= 1.0 / (2.0 * h);
  return out;
}

Tensor second_partial(const ChartField& field, const ChartPoint& p, int a, int b,
                      double base) {
  check_axis(field, p, a);
  check_axis(field, p, b);
  const double base_eff = resolve_base(field, base);
  const double ha = fd_step_for(base_eff, p[a]);
  if (a == b) {
    ChartPoint plus = p;
    ChartPoint minus = p;
    plus[a] += ha;
    minus[a] -= ha;
    Tensor out = eval_at(field, plus);
    Tensor center = eval_at(field, p);
    center *= 2.0;
    out -= center;
    out += eval_at(field, minus);
    out *= 1.0 / (ha * ha);
    return out;
  }
  const double hb = fd_step_for(base_eff, p[b]);
  ChartPoint pp = p, pm = p, mp = p, mm = p;
  pp[a] += ha;
  pp[b] += hb;
  pm[a] += ha;
  pm[b] -= hb;
  mp[a] -= ha;
  mp[b] += hb;
  mm[a] -= ha;
  mm[b] -= hb;
  Tensor out = eval_at(field, pp);
  out -= eval_at(field, pm);
  out -= eval_at(field, mp);
  out += eval_at(field, mm);
  out *= 1.0 / (4.0 * ha * hb);
  return out;
}

MetricAtPoint metric_from_components(const Tensor& g) {
  if (g.rank() != 2) {
    throw DimensionMismatch("metric must be rank 2, got rank " + std::to_string(g.rank()));
  }
  const int n = g.dim();
  const double scale_entry = g.max_abs();
  const double sym_tol = 1e-12 * scale_entry;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const double asym = std::abs(g(i, j) - g(j, i));
      if (asym > sym_tol) {
        std::ostringstream os;
        os << "metric symmetry violated at (" << i << ", " << j << "): |g_ij - g_ji| = "
           << asym << " against scale " << scale_entry;
        throw AsymmetricMetric(os.str());
      }
    }
  }

  Eigen::MatrixXd m(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) m(i, j) = g(i, j);
  }
  const double det = m.determinant();
  const double det_scale = std::pow(scale_entry, n);
  if (std::abs(det) <= 1e-14 * det_scale) {
    std::ostringstream os;
    os << "metric determinant " << det << " is singular against scale " << det_scale;
    throw SingularMetric(os.str());
  }

  MetricAtPoint out;
  out.g = Tensor(2, n, kAllLower);
  out.g_inv = Tensor(2, n, kAllUpper);
  const Eigen::MatrixXd inv = m.inverse();
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      out.g(i, j) = g(i, j);
      out.g_inv(i, j) = inv(i, j);
    }
  }
  out.det_g = det;
  out.sqrt_abs_det = std::sqrt(std::abs(det));

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(0.5 * (m + m.transpose()));
  out.signature.resize(n);
  for (int i = 0; i < n; ++i) {
    const double ev = solver.eigenvalues()(n - 1 - i);  // descending order
    out.signature[i] = (ev > 0.0) ? 1 : ((ev < 0.0) ? -1 : 0);
  }
  return out;
}

MetricAtPoint metric_at(const ChartField& g_field, const ChartPoint& p) {
  if (g_field.rank != 2) {
    throw DimensionMismatch("metric field must have rank 2, got " +
                            std::to_string(g_field.rank));
  }
  if (static_cast<int>(p.size()) != g_field.dim) {
    throw DimensionMismatch("metric field of dimension " + std::to_string(g_field.dim) +
                            " evaluated at a point of dimension " +
                            std::to_string(p.size()));
  }
  require_inside(g_field, p);
  return metric_from_components(g_field.eval(p));
}

Tensor log_sqrt_det_gradient(const ChartField& g_field, const ChartPoint& p,
                             double base) {
  const MetricAtPoint m = metric_at(g_field, p);
  const int n = g_field.dim;
  Tensor out(1, n, kAllLower);
  for (int i = 0; i < n; ++i) {
    const Tensor dgi = partial_derivative(g_field, p, i, base);
    double s = 0.0;
    for (int a = 0; a < n; ++a) {
      for (int b = 0; b < n; ++b) s += m.g_inv(a, b) * dgi(a, b);
    }
    out(i) = 0.5 * s;
  }
  return out;
}

Tensor log_sqrt_det_gradient_direct(const ChartField& g_field, const ChartPoint& p,
                                    double base) {
  if (static_cast<int>(p.size()) != g_field.dim) {
    throw DimensionMismatch("metric field of dimension " + std::to_string(g_field.dim) +
                            " evaluated at a point of dimension " +
                            std::to_string(p.size()));
  }
  const double base_eff = resolve_base(g_field, base);
  const int n = g_field.dim;
  Tensor out(1, n, kAllLower);
  for (int i = 0; i < n; ++i) {
    const double h = fd_step_for(base_eff, p[i]);
    ChartPoint plus = p;
    ChartPoint minus = p;
    plus[i] += h;
    minus[i] -= h;
    require_inside(g_field, plus);
    require_inside(g_field, minus);
    const double lp = std::log(metric_from_components(g_field.eval(plus)).sqrt_abs_det);
    const double lm = std::log(metric_from_components(g_field.eval(minus)).sqrt_abs_det);
    out(i) = (lp - lm) / (2.0 * h);
  }
  return out;
}

std::vector<ChartPoint> halton_points(const Box& box, int count, double inset) {
  static constexpr int kBases[4] = {2, 3, 5, 7};
  if (box.dim() < 1 || box.dim() > 4) {
    throw DimensionMismatch("quasi-random sampling supports dimensions 1-4, got " +
                            std::to_string(box.dim()));
  }
  std::vector<ChartPoint> pts;
  pts.reserve(static_cast<std::size_t>(std::max(count, 0)));
  std::vector<double> u(box.dim(), 0.0);
  for (int k = 1; k <= count; ++k) {
    for (int a = 0; a < box.dim(); ++a) u[a] = radical_inverse(kBases[a], k);
    pts.push_back(box.from_unit(u, inset));
  }
  return pts;
}

}  // namespace igcurv
