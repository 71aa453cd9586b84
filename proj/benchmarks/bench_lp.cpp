#include "drsoc/ambiguity.hpp"
#include "drsoc/game.hpp"
#include "drsoc/lp.hpp"

#include <benchmark/benchmark.h>

#include <random>

using namespace drsoc;

namespace {

FiniteDistribution random_weights(std::mt19937_64& rng, std::size_t k) {
    std::exponential_distribution<double> e(1.0);
    std::vector<double> w(k);
    double s = 0.0;
    for (double& x : w) s += (x = e(rng));
    for (double& x : w) x /= s;
    return FiniteDistribution(std::move(w));
}

void BM_CvarWorstCase(benchmark::State& state) {
    const auto k = static_cast<std::size_t>(state.range(0));
    std::mt19937_64 rng(1);
    const AmbiguitySet set(CvarBall{random_weights(rng, k), 0.3});
    std::vector<double> z(k);
    for (double& v : z) v = std::uniform_real_distribution<double>(0.0, 10.0)(rng);
    for (auto _ : state) benchmark::DoNotOptimize(set.worst_case(z).value);
}
BENCHMARK(BM_CvarWorstCase)->Arg(4)->Arg(16)->Arg(64);

void BM_WassersteinWorstCase(benchmark::State& state) {
    const auto k = static_cast<std::size_t>(state.range(0));
    std::mt19937_64 rng(2);
    DenseMatrix d(k, std::vector<double>(k, 0.0));
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = 0; j < k; ++j) d[i][j] = std::abs(static_cast<double>(i) - static_cast<double>(j));
    const AmbiguitySet set(WassersteinBall{random_weights(rng, k), 0.5, d});
    std::vector<double> z(k);
    for (double& v : z) v = std::uniform_real_distribution<double>(0.0, 10.0)(rng);
    for (auto _ : state) benchmark::DoNotOptimize(set.worst_case(z).value);
}
BENCHMARK(BM_WassersteinWorstCase)->Arg(4)->Arg(8)->Arg(16);

void BM_MixedGame(benchmark::State& state) {
    const auto m = static_cast<std::size_t>(state.range(0));
    const std::size_t k = 8;
    std::mt19937_64 rng(3);
    GameMatrix g(m, k);
    for (std::size_t u = 0; u < m; ++u)
        for (std::size_t a = 0; a < k; ++a) g(u, a) = std::uniform_real_distribution<double>(0.0, 5.0)(rng);
    const AmbiguitySet set(CvarBall{random_weights(rng, k), 0.5});
    for (auto _ : state) benchmark::DoNotOptimize(mixed_value(g, set).value);
}
BENCHMARK(BM_MixedGame)->Arg(2)->Arg(8)->Arg(32);

} // namespace
