#pragma once

/// \file verify.hpp
/// \brief Identity registry and verification runner: evaluates every
///        registered identity on sampled chart points and reports the maximum
///        relative residual per identity, plus convergence-order studies.

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>

#include "igcurv/einstein.hpp"
#include "igcurv/zoo.hpp"

namespace igcurv {

/// Residual class of an identity. `algebraic` identities hold exactly in the
/// shared finite-difference jet values (their residual plateaus at rounding
/// level regardless of step size); `differential` identities are true up to
/// FD truncation and shrink as O(h²).
enum class TolClass { algebraic, differential };
std::string to_string(TolClass c);

/// Default pass thresholds at the default step.
double tolerance_of(TolClass c);  ///< algebraic: 1e-9, differential: 5e-5

/// Evaluation context handed to identity evaluators: one bundle/point pair
/// with lazily built shared jet and jet stencil.
class EvalContext {
 public:
  EvalContext(const GeometryBundle& bundle, const ChartPoint& p, double base = 0.0);

  const GeometryBundle& bundle() const { return *bundle_; }
  const ChartPoint& point() const { return p_; }
  double base_h() const { return base_; }

  const GeometryJet& jet() const;        ///< built on first use
  const JetStencil& stencil() const;     ///< built on first use

 private:
  const GeometryBundle* bundle_;
  ChartPoint p_;
  double base_;
  mutable std::optional<GeometryJet> jet_;
  mutable std::shared_ptr<const JetStencil> stencil_;
};

/// One registered identity.
struct IdentitySpec {
  std::string id;     ///< stable dotted id, e.g. "connections.duality.metric_compatibility"
  std::string name;   ///< human-readable statement
  TolClass tol_class = TolClass::algebraic;
  /// Kinds of bundle the identity applies to (empty ⇒ all kinds).
  std::vector<BundleKind> kinds;
  /// Maximum relative residual of the identity at the context's point.
  std::function<double(EvalContext&)> eval;
  /// True for identities that compare the bundle's connection data against
  /// finite-difference metric derivatives (or rely on exact symmetries of
  /// that comparison); on bundles with independently supplied closed-form
  /// connections their pass threshold widens to the bundle's conn_data_tol.
  bool conn_sensitive = false;

  bool applies_to(BundleKind k) const;

  /// Pass threshold on the given bundle: class tolerance, widened by the
  /// bundle's connection-data allowance for conn_sensitive identities.
  double tolerance_on(const GeometryBundle& bundle) const;
};

/// The full registry, in reporting order (duality first).
const std::vector<IdentitySpec>& identity_registry();

/// Look up one identity by id; nullptr if absent.
const IdentitySpec* find_identity(const std::string& id);

/// Per-identity verification outcome.
struct IdentityResidual {
  std::string id;
  std::string name;
  TolClass tol_class = TolClass::algebraic;
  int points = 0;             ///< points actually sampled
  double max_residual = 0.0;  ///< max relative residual over points
  double tolerance = 0.0;
  bool pass = true;
};

/// Whole-manifold verification report.
struct VerifyReport {
  std::string manifold;
  BundleKind kind = BundleKind::general;
  int dim = 0;
  int points = 0;
  std::uint64_t seed = 0;
  double base_h = 0.0;
  std::vector<IdentityResidual> identities;  ///< registry order, each exactly once
  double wall_seconds = 0.0;

  bool all_pass() const;
};

/// Options for run_verify.
struct VerifyOptions {
  int points = 20;
  std::uint64_t seed = 20240801;
  double base_h = 0.0;   ///< 0 ⇒ default step policy
  int threads = 1;       ///< point-level parallelism; reduction order fixed
};

/// Evaluate every applicable registered identity on Halton-sampled points of
/// the bundle's domain. Identities whose kind filter excludes the bundle are
/// reported with points = 0 and pass = true (marked not applicable by
/// max_residual = 0).
VerifyReport run_verify(const GeometryBundle& bundle, const VerifyOptions& opt);

/// JSON (de)serialization of reports; parse(emit(r)) reproduces r exactly
/// (numbers are emitted with 17 significant digits).
std::string report_to_json(const VerifyReport& r);
VerifyReport report_from_json(const std::string& json_text);
std::string report_to_csv(const VerifyReport& r);

/// Convergence study of one identity on one bundle.
struct ConvergenceReport {
  std::string id;
  TolClass tol_class = TolClass::algebraic;
  std::vector<double> steps;
  std::vector<double> residuals;   ///< max over sampled points, per step
  double fitted_order = 0.0;       ///< log-log slope (least squares)
  bool plateau = false;            ///< true when residuals sit at rounding level
  bool pass = false;               ///< class-appropriate gate
};

/// Run the identity at each step of the sweep and fit the order. Differential
/// identities pass with fitted_order in [1.8, 2.2], or by plateau when their
/// truncation error already sits at rounding level; algebraic identities pass
/// by plateau only (every residual ≤ 1e-9). Throws UnknownName listing valid
/// ids for an unregistered identity.
ConvergenceReport run_convergence(const GeometryBundle& bundle, const std::string& id,
                                  const std::vector<double>& steps,
                                  const VerifyOptions& opt);

}  // namespace igcurv
