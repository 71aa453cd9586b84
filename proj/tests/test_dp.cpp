#include "drsoc/dp.hpp"
#include "drsoc/errors.hpp"

#include "generators.hpp"

#include <gtest/gtest.h>

#include <limits>

using namespace drsoc;
using namespace drsoc::testing;

namespace {

const AmbiguitySpec kFullSimplex2 = PolytopeH{2, {}, {}};

// T stages of one state each, cost 1 when the control misses the atom.
Problem pennies(std::size_t T, AmbiguitySpec spec) {
    Problem p;
    for (std::size_t t = 0; t < T; ++t) {
        StageModel sm = StageModel::sized(1, 2, 2);
        sm.set(0, 0, 0, 0, 0.0);
        sm.set(0, 0, 1, 0, 1.0);
        sm.set(0, 1, 0, 0, 1.0);
        sm.set(0, 1, 1, 0, 0.0);
        p.stages.push_back(sm);
    }
    p.terminal_cost = {0.0};
    p.ambiguity = StagewiseAmbiguity{std::vector<AmbiguitySpec>(T, spec)};
    return p;
}

// Plain expected-cost DP over histories, written without the scenario tree.
double neutral_value(const Problem& p, std::size_t t, const Path& path, std::size_t x) {
    if (t > p.horizon()) return p.terminal_cost[x];
    const StageModel& sm = p.stages[t - 1];
    const auto& q = std::get<Singleton>(p.spec_at(path)).dist;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t u = 0; u < sm.controls; ++u) {
        double s = 0.0;
        for (std::size_t a = 0; a < sm.atoms; ++a) {
            if (q[a] == 0.0) continue;
            Path child = path;
            child.push_back(static_cast<int>(a));
            s += q[a] * (sm.stage_cost(x, u, a) + neutral_value(p, t + 1, child, sm.next_state(x, u, a)));
        }
        best = std::min(best, s);
    }
    return best;
}

template <class Fn>
void for_each_pair(const Problem& p, const ScenarioTree& tree, Fn&& fn) {
    for (std::size_t t = 1; t <= p.horizon() + 1; ++t)
        for (const auto& n : tree.stage(t))
            for (std::size_t x = 0; x < p.state_count(t); ++x) fn(n, x);
}

} // namespace

TEST(ScenarioTree, NodeCounts) {
    auto one = pennies(1, kFullSimplex2);
    EXPECT_EQ(build_scenario_tree(one).size(), 3u);

    Problem p = pennies(2, kFullSimplex2);
    p.stages[1] = StageModel::sized(1, 1, 3);
    std::get<StagewiseAmbiguity>(p.ambiguity).stages[1] = Singleton{FiniteDistribution::uniform(3)};
    const auto tree = build_scenario_tree(p);
    EXPECT_EQ(tree.size(), 9u);
    EXPECT_EQ(tree.stage(3).size(), 6u);
    for (const auto& n : tree.nodes()) {
        EXPECT_EQ(n.path.size(), n.stage - 1);
        EXPECT_EQ(tree.find(n.path), n.id);
    }
}

TEST(ScenarioTree, BudgetIsEnforced) {
    auto p = pennies(3, kFullSimplex2);
    try {
        build_scenario_tree(p, 10);
        FAIL() << "expected a budget error";
    } catch (const InputError& e) {
        const std::string what = e.what();
        EXPECT_NE(what.find("tree too large"), std::string::npos);
        EXPECT_NE(what.find("15"), std::string::npos);
        EXPECT_NE(what.find("10"), std::string::npos);
    }
    EXPECT_EQ(build_scenario_tree(p, 15).size(), 15u);
}

TEST(Dp, SingletonNodeIsExpectationMinimization) {
    auto p = pennies(1, Singleton{FiniteDistribution({0.5, 0.5})});
    const auto tree = build_scenario_tree(p);
    const auto s = solve_nonrandomized(p, tree);
    EXPECT_NEAR(s.values.at(0, 0), 0.5, 1e-12);
    EXPECT_EQ(s.policy.control.at(0, 0), 0);
}

TEST(Dp, MatchingPenniesValues) {
    auto p = pennies(1, kFullSimplex2);
    const auto tree = build_scenario_tree(p);
    EXPECT_NEAR(solve_nonrandomized(p, tree).values.at(0, 0), 1.0, 1e-9);
    const auto mixed = solve_randomized(p, tree);
    EXPECT_NEAR(mixed.values.at(0, 0), 0.5, 1e-9);
    EXPECT_NEAR(mixed.policy.control.at(0, 0)[0], 0.5, 1e-9);
    EXPECT_NEAR(mixed.policy.control.at(0, 0)[1], 0.5, 1e-9);
    EXPECT_NEAR(solve_dual(p, tree).values.at(0, 0), 0.5, 1e-9);
}

TEST(Dp, StackedPenniesAddUp) {
    auto p = pennies(2, kFullSimplex2);
    const auto tree = build_scenario_tree(p);
    const double v = solve_randomized(p, tree).values.at(0, 0);

    // grid oracle: min over mixing weights of the worst vertex, stage by stage
    auto stage_value = [](double continuation) {
        double best = std::numeric_limits<double>::infinity();
        for (int i = 0; i <= 1000; ++i) {
            const double mu = i / 1000.0;
            const double worst = std::max(mu * 0.0 + (1 - mu) * 1.0, mu * 1.0 + (1 - mu) * 0.0);
            best = std::min(best, worst + continuation);
        }
        return best;
    };
    const double grid = stage_value(stage_value(0.0));
    EXPECT_NEAR(v, 1.0, 1e-9);
    EXPECT_NEAR(grid, 1.0, 2e-3);
}

TEST(Dp, RiskNeutralReduction) {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 20; ++trial) {
        ProblemShape shape{1 + trial % 3, 4, 3, 3, trial % 2 == 1};
        const auto p = random_problem(rng, shape, random_singleton);
        ASSERT_TRUE(validate_problem(p).empty());
        const auto tree = build_scenario_tree(p);
        const double oracle = neutral_value(p, 1, {}, p.initial_state);
        const auto r = existence_report(p, tree);
        EXPECT_NEAR(r.root_pure(), oracle, 1e-9);
        EXPECT_NEAR(r.root_mixed(), oracle, 1e-9);
        EXPECT_NEAR(r.root_dual(), oracle, 1e-9);
        EXPECT_TRUE(r.nonrandomized_exists);
        EXPECT_LE(r.max_gap_all_pairs, 1e-9);
    }
}

TEST(Dp, ChainAndStrongDualityOnConvexSpecs) {
    std::mt19937_64 rng(12);
    for (int trial = 0; trial < 15; ++trial) {
        ProblemShape shape{1 + trial % 2, 3, 3, 3, trial % 3 == 0};
        const auto p = random_problem(rng, shape, random_convex_spec);
        const auto tree = build_scenario_tree(p);
        const auto r = existence_report(p, tree);
        for_each_pair(p, tree, [&](const HistoryNode& n, std::size_t x) {
            const double pure = r.pure.values[n.id][x];
            const double mixed = r.mixed.values[n.id][x];
            const double dual = r.dual.values[n.id][x];
            EXPECT_LE(dual, mixed + 1e-7);
            EXPECT_LE(mixed, pure + 1e-7);
            EXPECT_NEAR(mixed, dual, 1e-7);
        });
        EXPECT_TRUE(r.duality_holds);
    }
}

TEST(Dp, ChainHoldsForNonconvexSets) {
    std::mt19937_64 rng(13);
    for (int trial = 0; trial < 15; ++trial) {
        const auto p = random_problem(rng, {2, 3, 3, 3, false}, [](std::mt19937_64& g, std::size_t k) {
            return random_spec(g, k, 1);
        });
        const auto tree = build_scenario_tree(p);
        const auto r = existence_report(p, tree);
        for_each_pair(p, tree, [&](const HistoryNode& n, std::size_t x) {
            EXPECT_LE(r.dual.values[n.id][x], r.mixed.values[n.id][x] + 1e-7);
            EXPECT_LE(r.mixed.values[n.id][x], r.pure.values[n.id][x] + 1e-7);
        });
    }
}

TEST(Dp, TerminalRowsHoldTerminalCost) {
    std::mt19937_64 rng(14);
    const auto p = random_problem(rng, {2, 3, 2, 2, false}, random_convex_spec);
    const auto tree = build_scenario_tree(p);
    const auto r = existence_report(p, tree);
    for (const auto& leaf : tree.stage(3)) {
        EXPECT_EQ(r.pure.values[leaf.id], p.terminal_cost);
        EXPECT_EQ(r.mixed.values[leaf.id], p.terminal_cost);
        EXPECT_EQ(r.dual.values[leaf.id], p.terminal_cost);
    }
}

TEST(Dp, ShiftingStageCostsShiftsTheValue) {
    std::mt19937_64 rng(15);
    for (int trial = 0; trial < 10; ++trial) {
        const auto p = random_problem(rng, {3, 3, 3, 2, false}, random_convex_spec);
        auto shifted = p;
        const double c = 2.5;
        for (auto& sm : shifted.stages)
            for (double& v : sm.cost) v += c;
        const auto tree = build_scenario_tree(p);
        const auto a = solve_nonrandomized(p, tree);
        const auto b = solve_nonrandomized(shifted, tree);
        EXPECT_NEAR(b.values.at(0, p.initial_state), a.values.at(0, p.initial_state) + 3 * c, 1e-8);
        EXPECT_EQ(a.policy.control, b.policy.control);
    }
}

TEST(Dp, ExistenceReportOnPennies) {
    auto p = pennies(1, kFullSimplex2);
    const auto r = existence_report(p, build_scenario_tree(p));
    EXPECT_FALSE(r.nonrandomized_exists);
    EXPECT_FALSE(r.pure_policy_certified);
    EXPECT_NEAR(r.max_gap, 0.5, 1e-9);
    ASSERT_EQ(r.failing.size(), 1u);
    EXPECT_EQ(r.failing[0].at, (NodeState{0, 0}));
    EXPECT_NEAR(r.failing[0].gap, 0.5, 1e-9);
    EXPECT_TRUE(r.duality_holds);
}

TEST(Dp, ExistenceReportOnSingletons) {
    auto p = pennies(2, Singleton{FiniteDistribution({0.5, 0.5})});
    const auto r = existence_report(p, build_scenario_tree(p));
    EXPECT_TRUE(r.nonrandomized_exists);
    EXPECT_TRUE(r.nonrandomized_exists_all_pairs);
    EXPECT_TRUE(r.pure_policy_certified);
    EXPECT_LE(r.max_gap_all_pairs, 1e-12);
    EXPECT_TRUE(r.failing.empty());
}

TEST(Dp, UnreachableFailuresDoNotCount) {
    // state 1 plays pennies but is never visited from state 0
    Problem p;
    StageModel sm = StageModel::sized(2, 2, 2);
    sm.set(1, 0, 1, 0, 1.0);
    sm.set(1, 1, 0, 0, 1.0);
    p.stages.push_back(sm);
    p.terminal_cost = {0.0};
    p.ambiguity = StagewiseAmbiguity{{kFullSimplex2}};
    const auto r = existence_report(p, build_scenario_tree(p));
    EXPECT_TRUE(r.nonrandomized_exists);
    EXPECT_FALSE(r.nonrandomized_exists_all_pairs);
    EXPECT_NEAR(r.max_gap_all_pairs, 0.5, 1e-9);
}

TEST(Dp, StagewiseMatchesTree) {
    std::mt19937_64 rng(16);
    for (int trial = 0; trial < 10; ++trial) {
        const auto p = random_problem(rng, {1 + trial % 3, 3, 3, 3, false}, random_convex_spec);
        const auto tree = build_scenario_tree(p);
        const auto sw = solve_stagewise(p);
        const auto r = existence_report(p, tree);
        for_each_pair(p, tree, [&](const HistoryNode& n, std::size_t x) {
            EXPECT_NEAR(sw.pure[n.stage - 1][x], r.pure.values[n.id][x], 1e-9);
            EXPECT_NEAR(sw.mixed[n.stage - 1][x], r.mixed.values[n.id][x], 1e-9);
            EXPECT_NEAR(sw.dual[n.stage - 1][x], r.dual.values[n.id][x], 1e-9);
        });
    }
}

TEST(Dp, StagewiseRejectsPerNodeAmbiguity) {
    std::mt19937_64 rng(17);
    const auto p = random_problem(rng, {2, 2, 2, 2, true}, random_convex_spec);
    EXPECT_THROW(solve_stagewise(p), InputError);
}

TEST(Dp, ResultsDoNotDependOnThreadCount) {
    std::mt19937_64 rng(18);
    const auto p = random_problem(rng, {3, 3, 3, 3, false}, random_convex_spec);
    const auto tree = build_scenario_tree(p);
    const auto a = solve_randomized(p, tree, {kSaddleTol, 1});
    const auto b = solve_randomized(p, tree, {kSaddleTol, 4});
    EXPECT_EQ(a.values, b.values);
    EXPECT_EQ(a.policy.control, b.policy.control);
}

TEST(Validation, ReportsOffendingCells) {
    auto p = pennies(2, kFullSimplex2);
    EXPECT_TRUE(validate_problem(p).empty());

    auto bad = p;
    bad.stages[0].next[bad.stages[0].index(0, 1, 0)] = 1;
    auto v = validate_problem(bad);
    ASSERT_EQ(v.size(), 1u);
    EXPECT_NE(v[0].where.find("t=1"), std::string::npos);
    EXPECT_NE(v[0].where.find("control=1"), std::string::npos);
    EXPECT_NE(v[0].where.find("atom=0"), std::string::npos);

    auto weights = p;
    std::get<StagewiseAmbiguity>(weights.ambiguity).stages[1] = Singleton{FiniteDistribution({0.5, 0.6})};
    EXPECT_EQ(validate_problem(weights).size(), 1u);
    EXPECT_THROW(require_valid(weights), InputError);
}
