#include <memory>
#include <vector>

#include <benchmark/benchmark.h>

#include "srbo/kernel.hpp"
#include "srbo/nusvm.hpp"
#include "srbo/ocsvm.hpp"
#include "srbo/screening.hpp"
#include "srbo/synthetic.hpp"

namespace {

std::shared_ptr<const srbo::Dataset> gaussians(std::size_t per_class) {
  return std::make_shared<const srbo::Dataset>(
      srbo::synthetic::generate(srbo::synthetic::Kind::gauss5, per_class, 1));
}

std::vector<double> fine_grid(double start, std::size_t points) {
  std::vector<double> g(points);
  for (std::size_t k = 0; k < points; ++k) g[k] = start + 0.001 * static_cast<double>(k);
  return g;
}

void BM_GramFull(benchmark::State& state) {
  const auto d = gaussians(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    srbo::GramOracle q(d, srbo::KernelSpec::rbf(1.0), srbo::GramMode::labeled,
                       {srbo::CachePolicy::Kind::full, 0});
    benchmark::DoNotOptimize(q.diag(0));
  }
}
BENCHMARK(BM_GramFull)->Arg(250)->Arg(500)->Arg(1000)->Unit(benchmark::kMillisecond);

void BM_DcdmTrain(benchmark::State& state) {
  const auto d = gaussians(static_cast<std::size_t>(state.range(0)));
  const srbo::GramOracle q(d, srbo::KernelSpec::linear(), srbo::GramMode::labeled);
  for (auto _ : state) benchmark::DoNotOptimize(srbo::train_full(q, 0.5).objective);
}
BENCHMARK(BM_DcdmTrain)->Arg(250)->Arg(500)->Arg(1000)->Unit(benchmark::kMillisecond);

// One grid step of the rule: delta, ball, bounds and the screen itself.
void BM_ScreenStep(benchmark::State& state) {
  const auto d = gaussians(static_cast<std::size_t>(state.range(0)));
  const srbo::GramOracle q(d, srbo::KernelSpec::linear(), srbo::GramMode::labeled);
  const auto l = d->rows();
  const double upper = 1.0 / static_cast<double>(l);
  const auto alpha = srbo::train_full(q, 0.5, {srbo::SolverKind::dcdm, 1e-10}).alpha;
  for (auto _ : state) {
    const auto delta = srbo::solve_delta_full(q, alpha, 0.501, upper);
    const auto ball = srbo::make_ball(q, alpha, delta, 0.5, 0.501);
    const auto bounds = srbo::score_bounds(q, ball);
    const auto [lo, hi] = srbo::rho_bounds(bounds, 0.501, l);
    benchmark::DoNotOptimize(srbo::screen(bounds, lo, hi, upper).screening_ratio);
  }
}
BENCHMARK(BM_ScreenStep)->Arg(250)->Arg(500)->Arg(1000)->Unit(benchmark::kMillisecond);

void BM_NuPath(benchmark::State& state) {
  const auto d = gaussians(1000);
  const srbo::GramOracle q(d, srbo::KernelSpec::linear(), srbo::GramMode::labeled,
                           {srbo::CachePolicy::Kind::full, 0});
  const auto grid = fine_grid(0.5, 9);
  srbo::PathOptions options;
  options.screening = state.range(0) != 0;
  double ratio = 0.0;
  for (auto _ : state) ratio = srbo::solve_path(q, grid, options).mean_screening_ratio();
  state.counters["screening_ratio"] = ratio;
}
BENCHMARK(BM_NuPath)->ArgName("screening")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_OcPath(benchmark::State& state) {
  const auto d = std::make_shared<const srbo::Dataset>(
      srbo::synthetic::generate_anomaly(srbo::synthetic::Kind::gauss1, 800, 0.2, 1));
  const srbo::GramOracle h(d, srbo::KernelSpec::rbf(1.0), srbo::GramMode::unlabeled,
                           {srbo::CachePolicy::Kind::full, 0});
  const auto grid = fine_grid(0.2, 9);
  srbo::PathOptions options;
  options.screening = state.range(0) != 0;
  double ratio = 0.0;
  for (auto _ : state) ratio = srbo::solve_path_oc(h, grid, options).mean_screening_ratio();
  state.counters["screening_ratio"] = ratio;
}
BENCHMARK(BM_OcPath)->ArgName("screening")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
