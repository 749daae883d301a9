// Serial reference kernels against their OpenMP counterparts.
#include <benchmark/benchmark.h>

#include <map>

#include "scorekit/density.hpp"
#include "scorekit/mle.hpp"
#include "scorekit/skewsym.hpp"
#include "scorekit/stein.hpp"

namespace {

using namespace scorekit;

const std::vector<double>& sample(std::size_t n) {
  static std::map<std::size_t, std::vector<double>> cache;
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, draw_sample(make_builtin("logistic"), n, 42)).first;
  return it->second;
}

void BM_DiscrepancySerial(benchmark::State& state) {
  const auto d = make_builtin("normal");
  const auto bank = stein::default_bank();
  const auto& x = sample(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(stein::empirical_discrepancy_serial(x, d, stein::OperatorKind::Location, bank));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_DiscrepancyParallel(benchmark::State& state) {
  const auto d = make_builtin("normal");
  const auto bank = stein::default_bank();
  const auto& x = sample(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(stein::empirical_discrepancy(x, d, stein::OperatorKind::Location, bank));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_TrialsSerial(benchmark::State& state) {
  const auto d = make_builtin("logistic");
  for (auto _ : state) {
    benchmark::DoNotOptimize(mle::verify_characterization_serial(
        d, mle::Kind::Location, mle::Reference::Mean, static_cast<int>(state.range(0)), 25, 42));
  }
}

void BM_TrialsParallel(benchmark::State& state) {
  const auto d = make_builtin("logistic");
  for (auto _ : state) {
    benchmark::DoNotOptimize(mle::verify_characterization(
        d, mle::Kind::Location, mle::Reference::Mean, static_cast<int>(state.range(0)), 25, 42));
  }
}

skewsym::SkewSymmetricModel skew_t_model() {
  return {make_builtin("normal"), skewsym::SkewingCdf::student(6.0), skewsym::SkewingArgument::skew_t(5.0)};
}

void BM_FisherSerial(benchmark::State& state) {
  const auto m = skew_t_model();
  for (auto _ : state) benchmark::DoNotOptimize(skewsym::fisher_matrix_serial(m));
}

void BM_FisherParallel(benchmark::State& state) {
  const auto m = skew_t_model();
  for (auto _ : state) benchmark::DoNotOptimize(skewsym::fisher_matrix(m));
}

}  // namespace

BENCHMARK(BM_DiscrepancySerial)->Arg(1 << 14)->Arg(1 << 18)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_DiscrepancyParallel)->Arg(1 << 14)->Arg(1 << 18)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_TrialsSerial)->Arg(200)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_TrialsParallel)->Arg(200)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_FisherSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_FisherParallel)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
