#include <benchmark/benchmark.h>

#include <vector>

#include "eslab/landscape.hpp"
#include "eslab/optimizer.hpp"

namespace {

std::vector<double> rank_spectrum(std::size_t d, std::size_t rank) {
  std::vector<double> lambda(d, 0.0);
  for (std::size_t k = 0; k < rank && k < d; ++k) lambda[k] = 1.0;
  return lambda;
}

void BM_EsStepFlat(benchmark::State& state) {
  const auto d = static_cast<std::size_t>(state.range(0));
  const eslab::Landscape landscape = eslab::FlatLandscape(d);
  const eslab::NoiseModel noise{1.0};
  eslab::EsConfig cfg = eslab::EsConfig::with_default_step(0.02, 30);
  eslab::Rng rng(1);
  eslab::EsWorkspace ws(d);
  std::vector<double> theta(d, 0.0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(eslab::es_step_inplace(theta, landscape, noise, cfg, rng, ws));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(d * cfg.population));
}
BENCHMARK(BM_EsStepFlat)->Arg(200)->Arg(10'000)->Arg(1'000'000);

void BM_EsStepQuadratic(benchmark::State& state) {
  const auto d = static_cast<std::size_t>(state.range(0));
  const eslab::Landscape landscape = eslab::QuadraticLandscape(rank_spectrum(d, 5));
  eslab::EsConfig cfg = eslab::EsConfig::with_default_step(0.1, 30);
  eslab::Rng rng(1);
  eslab::EsWorkspace ws(d);
  std::vector<double> theta(d, 0.3);
  for (auto _ : state) {
    benchmark::DoNotOptimize(eslab::es_step_inplace(theta, landscape, {}, cfg, rng, ws));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(d * cfg.population));
}
BENCHMARK(BM_EsStepQuadratic)->Arg(500)->Arg(100'000);

void BM_GdStep(benchmark::State& state) {
  const auto d = static_cast<std::size_t>(state.range(0));
  const eslab::Landscape landscape = eslab::QuadraticLandscape(rank_spectrum(d, d / 10));
  const eslab::GdConfig cfg{0.1, 1};
  std::vector<double> theta(d, 1.0);
  for (auto _ : state) {
    eslab::gd_step_inplace(theta, landscape, cfg);
    benchmark::ClobberMemory();
  }
}
BENCHMARK(BM_GdStep)->Arg(1'000)->Arg(1'000'000);

void BM_OuStep(benchmark::State& state) {
  const auto d = static_cast<std::size_t>(state.range(0));
  const eslab::QuadraticLandscape spectrum(rank_spectrum(d, d / 10));
  eslab::OuConfig cfg;
  cfg.sigma_r_fixed = 0.01;
  cfg.alpha = 0.01;
  cfg.sigma = 0.02;
  cfg.population = 30;
  eslab::Rng rng(1);
  std::vector<double> theta(d, 1.0);
  for (auto _ : state) {
    eslab::ou_step_inplace(theta, cfg, spectrum, rng);
    benchmark::ClobberMemory();
  }
}
BENCHMARK(BM_OuStep)->Arg(1'000)->Arg(1'000'000);

void BM_RewardRotated(benchmark::State& state) {
  const auto d = static_cast<std::size_t>(state.range(0));
  const eslab::QuadraticLandscape q(rank_spectrum(d, 5), 3);
  std::vector<double> theta(d, 0.1);
  for (auto _ : state) benchmark::DoNotOptimize(q.reward(theta));
}
BENCHMARK(BM_RewardRotated)->Arg(64)->Arg(512);

}  // namespace

BENCHMARK_MAIN();
