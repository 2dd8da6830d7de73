#include <benchmark/benchmark.h>

#include <vector>

#include "prcut/poisson_quadrature.hpp"
#include "prcut/random.hpp"

using namespace prcut;

namespace {

std::vector<double> profile_of(std::size_t m) {
  Rng rng(m);
  std::vector<double> p(m);
  for (auto& v : p) v = rng.uniform();
  return p;
}

void BM_GaussLegendreRule(benchmark::State& state) {
  const int order = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(gauss_legendre_unit(order));
}
BENCHMARK(BM_GaussLegendreRule)->Arg(8)->Arg(64)->Arg(256);

void BM_InverseMoment(benchmark::State& state) {
  const auto method = static_cast<InverseMomentMethod>(state.range(1));
  const BernoulliProfile profile(profile_of(static_cast<std::size_t>(state.range(0))));
  for (auto _ : state) benchmark::DoNotOptimize(pb_inv1p_expect(profile, method));
}
BENCHMARK(BM_InverseMoment)
    ->Args({12, static_cast<int>(InverseMomentMethod::quadrature)})
    ->Args({12, static_cast<int>(InverseMomentMethod::pmf)})
    ->Args({12, static_cast<int>(InverseMomentMethod::inclusion_exclusion)})
    ->Args({256, static_cast<int>(InverseMomentMethod::quadrature)})
    ->Args({256, static_cast<int>(InverseMomentMethod::pmf)});

}  // namespace
