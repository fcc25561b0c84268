// Serial reference kernels vs their OpenMP counterparts.
#include <cmath>

#include <benchmark/benchmark.h>

#include "bilevel/algorithms.hpp"
#include "bilevel/kernels.hpp"
#include "bilevel/problems.hpp"

using namespace bilevel;
namespace k = bilevel::kernels;

namespace {

Vector wave(Eigen::Index n, double phase) {
  Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = std::sin(0.37 * static_cast<double>(i) + phase);
  return v;
}

template <bool Parallel>
void BM_gemv(benchmark::State& state) {
  const Eigen::Index n = state.range(0);
  k::RowMatrix a(n, n);
  for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = std::cos(static_cast<double>(i));
  const Vector x = wave(n, 0.1);
  Vector y;
  for (auto _ : state) {
    if constexpr (Parallel) k::omp::gemv(a, x, y); else k::serial::gemv(a, x, y);
    benchmark::DoNotOptimize(y.data());
  }
  state.SetItemsProcessed(state.iterations() * n * n);
}

template <bool Parallel>
void BM_chain_gradient(benchmark::State& state) {
  const Eigen::Index n = state.range(0);
  const Vector x = wave(n, 0.2);
  Vector g(n);
  for (auto _ : state) {
    if constexpr (Parallel) k::omp::chain_gradient(x, n / 2, g); else k::serial::chain_gradient(x, n / 2, g);
    benchmark::DoNotOptimize(g.data());
  }
  state.SetItemsProcessed(state.iterations() * n);
}

template <bool Parallel>
void BM_logistic_terms(benchmark::State& state) {
  const Eigen::Index n = state.range(0);
  const Vector z = 5.0 * wave(n, 0.3);
  Vector y(n), loss(n), res(n);
  for (Eigen::Index i = 0; i < n; ++i) y[i] = static_cast<double>(i % 2);
  for (auto _ : state) {
    if constexpr (Parallel) k::omp::logistic_terms(z, y, loss, res); else k::serial::logistic_terms(z, y, loss, res);
    benchmark::DoNotOptimize(loss.data());
  }
  state.SetItemsProcessed(state.iterations() * n);
}

template <bool Parallel>
void BM_extrapolate(benchmark::State& state) {
  const Eigen::Index n = state.range(0);
  const Vector x = wave(n, 0.4), xp = wave(n, 0.5);
  Vector out(n);
  for (auto _ : state) {
    if constexpr (Parallel) k::omp::extrapolate(x, xp, 0.9, out); else k::serial::extrapolate(x, xp, 0.9, out);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * n);
}

template <k::Backend B>
void BM_bfpg_logistic(benchmark::State& state) {
  const Dataset ds = synthetic_dataset(455, 30, 1);
  LogisticLiftSpec spec;
  spec.lift_degree = 2;
  const auto prob = make_logistic_lifted(ds, spec, B);
  SolverConfig cfg;
  cfg.method = Method::BFPG;
  cfg.schedule.delta = 1.9;
  cfg.max_iter = 200;
  cfg.backend = B;
  RunOptions opts;
  opts.store_iterates = false;
  opts.compute_energy = false;
  for (auto _ : state) benchmark::DoNotOptimize(run(prob, cfg, Vector::Zero(prob.dimension), {}, opts));
}

}  // namespace

BENCHMARK(BM_gemv<false>)->Name("gemv/serial")->Arg(256)->Arg(1024);
BENCHMARK(BM_gemv<true>)->Name("gemv/omp")->Arg(256)->Arg(1024);
BENCHMARK(BM_chain_gradient<false>)->Name("chain_gradient/serial")->Arg(1 << 12)->Arg(1 << 18);
BENCHMARK(BM_chain_gradient<true>)->Name("chain_gradient/omp")->Arg(1 << 12)->Arg(1 << 18);
BENCHMARK(BM_logistic_terms<false>)->Name("logistic_terms/serial")->Arg(1 << 12)->Arg(1 << 18);
BENCHMARK(BM_logistic_terms<true>)->Name("logistic_terms/omp")->Arg(1 << 12)->Arg(1 << 18);
BENCHMARK(BM_extrapolate<false>)->Name("extrapolate/serial")->Arg(1 << 12)->Arg(1 << 18);
BENCHMARK(BM_extrapolate<true>)->Name("extrapolate/omp")->Arg(1 << 12)->Arg(1 << 18);
BENCHMARK(BM_bfpg_logistic<k::Backend::Serial>)->Name("bfpg_logistic_200/serial")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_bfpg_logistic<k::Backend::Parallel>)->Name("bfpg_logistic_200/omp")->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
