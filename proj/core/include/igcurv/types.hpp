#pragma once

/// \file types.hpp
/// \brief Dense small tensors (rank 0–4, dim 2–4), slot variance tags, and the
///        library error hierarchy.
///
/// Storage is row-major over all slots; the slot-order conventions for every
/// geometric object are recorded in docs/conventions.md. All types here are
/// immutable-friendly plain values: operations never mutate their inputs.

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace igcurv {

/// Variance tag for one tensor slot.
enum class Variance : std::uint8_t { upper, lower };

/// Base class of all igcurv errors. The `what()` string is prefixed with the
/// stable error name so callers (and the CLI) can classify without RTTI.
struct Error : std::runtime_error {
  explicit Error(const std::string& name, const std::string& detail)
      : std::runtime_error(name + ": " + detail) {}
};

#define IGCURV_DEFINE_ERROR(NAME)                         \
  struct NAME final : Error {                             \
    explicit NAME(const std::string& detail)              \
        : Error(#NAME, detail) {}                         \
  }

IGCURV_DEFINE_ERROR(DomainEscape);
IGCURV_DEFINE_ERROR(SingularMetric);
IGCURV_DEFINE_ERROR(AsymmetricMetric);
IGCURV_DEFINE_ERROR(DimensionMismatch);
IGCURV_DEFINE_ERROR(VarianceMismatch);
IGCURV_DEFINE_ERROR(NonpositiveVolume);
IGCURV_DEFINE_ERROR(NonpositiveParameter);
IGCURV_DEFINE_ERROR(CubicSymmetryViolation);
IGCURV_DEFINE_ERROR(GenerationFailure);
IGCURV_DEFINE_ERROR(ParseError);
IGCURV_DEFINE_ERROR(ValidationError);
IGCURV_DEFINE_ERROR(AlphaSingular);
IGCURV_DEFINE_ERROR(KindMismatch);
IGCURV_DEFINE_ERROR(UnknownName);

#undef IGCURV_DEFINE_ERROR

/// Dense real tensor of rank 0..4 over a chart of dimension 2..4.
///
/// Rank 0 holds exactly one entry. Component access is bounds-unchecked in
/// release builds; the rank of the accessor must match the tensor rank.
class Tensor {
 public:
  static constexpr int kMaxRank = 4;

  Tensor() = default;

  Tensor(int rank, int dim,
         std::array<Variance, kMaxRank> variance = {Variance::lower, Variance::lower,
                                                    Variance::lower, Variance::lower})
      : rank_(rank), dim_(dim), variance_(variance), data_(size_of(rank, dim), 0.0) {
    if (rank < 0 || rank > kMaxRank) throw DimensionMismatch("tensor rank must be 0..4");
    if (rank > 0 && (dim < 2 || dim > 4)) throw DimensionMismatch("tensor dim must be 2..4");
  }

  /// Rank-0 tensor holding one value.
  static Tensor scalar(double v) {
    Tensor t;
    t.rank_ = 0;
    t.dim_ = 0;
    t.data_.assign(1, v);
    return t;
  }

  int rank() const { return rank_; }
  int dim() const { return dim_; }
  Variance variance(int slot) const { return variance_.at(static_cast<std::size_t>(slot)); }
  void set_variance(int slot, Variance v) { variance_.at(static_cast<std::size_t>(slot)) = v; }

  double& operator()() { return data_[0]; }
  double operator()() const { return data_[0]; }
  double& operator()(int i) { return data_[static_cast<std::size_t>(i)]; }
  double operator()(int i) const { return data_[static_cast<std::size_t>(i)]; }
  double& operator()(int i, int j) { return data_[static_cast<std::size_t>(i * dim_ + j)]; }
  double operator()(int i, int j) const { return data_[static_cast<std::size_t>(i * dim_ + j)]; }
  double& operator()(int i, int j, int k) {
    return data_[static_cast<std::size_t>((i * dim_ + j) * dim_ + k)];
  }
  double operator()(int i, int j, int k) const {
    return data_[static_cast<std::size_t>((i * dim_ + j) * dim_ + k)];
  }
  double& operator()(int i, int j, int k, int l) {
    return data_[static_cast<std::size_t>(((i * dim_ + j) * dim_ + k) * dim_ + l)];
  }
  double operator()(int i, int j, int k, int l) const {
    return data_[static_cast<std::size_t>(((i * dim_ + j) * dim_ + k) * dim_ + l)];
  }

  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }

  /// Largest absolute component.
  double max_abs() const {
    double m = 0.0;
    for (double v : data_) m = std::max(m, std::abs(v));
    return m;
  }

  bool all_finite() const {
    for (double v : data_)
      if (!std::isfinite(v)) return false;
    return true;
  }

  bool same_shape(const Tensor& o) const { return rank_ == o.rank_ && dim_ == o.dim_; }

  Tensor& operator+=(const Tensor& o) {
    require_shape(o);
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
    return *this;
  }
  Tensor& operator-=(const Tensor& o) {
    require_shape(o);
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
    return *this;
  }
  Tensor& operator*=(double s) {
    for (double& v : data_) v *= s;
    return *this;
  }

  friend Tensor operator+(Tensor a, const Tensor& b) { return a += b; }
  friend Tensor operator-(Tensor a, const Tensor& b) { return a -= b; }
  friend Tensor operator*(double s, Tensor a) { return a *= s; }
  friend Tensor operator*(Tensor a, double s) { return a *= s; }

 private:
  static std::size_t size_of(int rank, int dim) {
    std::size_t n = 1;
    for (int r = 0; r < rank; ++r) n *= static_cast<std::size_t>(dim);
    return n;
  }
  void require_shape(const Tensor& o) const {
    if (!same_shape(o)) throw DimensionMismatch("tensor shapes differ");
  }

  int rank_ = 0;
  int dim_ = 0;
  std::array<Variance, kMaxRank> variance_{Variance::lower, Variance::lower, Variance::lower,
                                           Variance::lower};
  std::vector<double> data_{0.0};
};

/// Relative residual of an identity: `absres` scaled by the magnitude of the
/// identity's terms. Tiny absolute residuals (≤ 1e-12) are reported as-is so
/// identically-zero identities on flat geometries do not divide by noise.
inline double relative_residual(double absres, double scale) {
  if (absres <= 1e-12) return absres;
  return absres / std::max(scale, 1e-12);
}

/// Convenience variance packs.
inline constexpr std::array<Variance, 4> kAllLower = {Variance::lower, Variance::lower,
                                                      Variance::lower, Variance::lower};
inline constexpr std::array<Variance, 4> kAllUpper = {Variance::upper, Variance::upper,
                                                      Variance::upper, Variance::upper};
/// (upper, lower, lower, -) — connections, torsion, difference tensor.
inline constexpr std::array<Variance, 4> kConn = {Variance::upper, Variance::lower,
                                                  Variance::lower, Variance::lower};
/// (lower, upper, lower, lower) — Riemann R[m][k][j][i].
inline constexpr std::array<Variance, 4> kRiemann = {Variance::lower, Variance::upper,
                                                     Variance::lower, Variance::lower};

}  // namespace igcurv
