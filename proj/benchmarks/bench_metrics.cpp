#include <benchmark/benchmark.h>

#include <random>

#include "biomauth/metrics.hpp"
#include "biomauth/splitting.hpp"

using namespace biomauth;

namespace {

void BM_Eer(benchmark::State& state) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::bernoulli_distribution coin(0.3);
  std::vector<ScoreLabel> scores(static_cast<std::size_t>(state.range(0)));
  for (auto& s : scores) s = {u(rng), coin(rng)};
  scores.front().genuine = true;
  scores.back().genuine = false;
  for (auto _ : state) benchmark::DoNotOptimize(compute_eer(scores));
  state.SetComplexityN(state.range(0));
}

void BM_UserSplit(benchmark::State& state) {
  const auto d = generate_synthetic({.n_users = 51, .samples_per_user = 100, .separation = 1.0, .seed = 1});
  std::uint64_t seed = 0;
  for (auto _ : state) benchmark::DoNotOptimize(build_user_split(d, d.users().front(), ++seed));
}

}  // namespace

BENCHMARK(BM_Eer)->RangeMultiplier(8)->Range(64, 1 << 18)->Complexity();
BENCHMARK(BM_UserSplit);
BENCHMARK_MAIN();
