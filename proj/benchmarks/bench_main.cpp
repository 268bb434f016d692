// Microbenchmarks for the hot paths: jet assembly, the algebraic identity
// suite at a single point, and the quadrature-backed Gaussian-family metric.

#include <benchmark/benchmark.h>

#include "igcurv/chart.hpp"
#include "igcurv/connections.hpp"
#include "igcurv/curvature.hpp"
#include "igcurv/verify.hpp"
#include "igcurv/zoo.hpp"

namespace {

void BM_riemann_jet(benchmark::State& state) {
  const int dim = static_cast<int>(state.range(0));
  const igcurv::GeometryBundle bundle =
      igcurv::random_bundle(igcurv::BundleKind::statistical, dim, 42);
  const std::vector<igcurv::ChartPoint> pts =
      igcurv::halton_points(bundle.domain, 1);
  for (auto _ : state) {
    igcurv::GeometryJet jet(bundle, pts[0]);
    benchmark::DoNotOptimize(jet.R.data().data());
    benchmark::ClobberMemory();
  }
}
BENCHMARK(BM_riemann_jet)->Arg(2)->Arg(3)->Arg(4);

void BM_identity_suite_point(benchmark::State& state) {
  const igcurv::GeometryBundle bundle =
      igcurv::random_bundle(igcurv::BundleKind::statistical, 3, 42);
  const std::vector<igcurv::ChartPoint> pts =
      igcurv::halton_points(bundle.domain, 1);
  const std::vector<igcurv::IdentitySpec>& reg = igcurv::identity_registry();
  for (auto _ : state) {
    igcurv::EvalContext ctx(bundle, pts[0]);
    double acc = 0.0;
    for (const igcurv::IdentitySpec& spec : reg) {
      if (spec.tol_class == igcurv::TolClass::algebraic &&
          spec.applies_to(bundle.kind)) {
        acc += spec.eval(ctx);
      }
    }
    benchmark::DoNotOptimize(acc);
  }
}
BENCHMARK(BM_identity_suite_point);

void BM_gaussian_metric_gh64(benchmark::State& state) {
  const igcurv::GeometryBundle bundle = igcurv::gaussian_family();
  const igcurv::ChartPoint p{0.3, 1.2};
  for (auto _ : state) {
    igcurv::Tensor g = bundle.g.eval(p);
    benchmark::DoNotOptimize(g.data().data());
  }
}
BENCHMARK(BM_gaussian_metric_gh64);

}  // namespace

BENCHMARK_MAIN();
