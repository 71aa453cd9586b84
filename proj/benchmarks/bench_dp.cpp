#include "drsoc/dp.hpp"
#include "drsoc/models.hpp"

#include <benchmark/benchmark.h>

using namespace drsoc;

namespace {

Problem inventory(std::size_t horizon) {
    InventoryParams ip;
    for (std::size_t t = 0; t < horizon; ++t) ip.stages.push_back({0.1, 2.0, 1.0, 3.0, {0, 1, 2, 3}, {0.1, 0.4, 0.3, 0.2}});
    ip.grid_min = -3.0 * static_cast<double>(horizon);
    ip.grid_max = 3.0 * static_cast<double>(horizon);
    std::vector<AmbiguitySpec> sets;
    for (const auto& q : inventory_reference(ip)) sets.push_back(CvarBall{q, 0.4});
    return build_inventory(ip, sets);
}

void BM_ExistenceReport(benchmark::State& state) {
    const Problem p = inventory(static_cast<std::size_t>(state.range(0)));
    const ScenarioTree tree = build_scenario_tree(p);
    for (auto _ : state) benchmark::DoNotOptimize(existence_report(p, tree).max_gap);
    state.counters["nodes"] = static_cast<double>(tree.size());
}
BENCHMARK(BM_ExistenceReport)->Arg(1)->Arg(2)->Arg(3)->Unit(benchmark::kMillisecond);

void BM_Stagewise(benchmark::State& state) {
    const Problem p = inventory(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(solve_stagewise(p).pure.front().front());
}
BENCHMARK(BM_Stagewise)->Arg(2)->Arg(4)->Arg(8)->Unit(benchmark::kMillisecond);

} // namespace
