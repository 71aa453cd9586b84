#include "drsoc/dp.hpp"
#include "drsoc/errors.hpp"
#include "drsoc/models.hpp"
#include "drsoc/nested.hpp"

#include <gtest/gtest.h>

using namespace drsoc;

namespace {

InventoryParams one_stage(double b, double h, std::vector<double> demand = {0, 1, 2}) {
    InventoryParams ip;
    const std::vector<double> w(demand.size(), 1.0 / static_cast<double>(demand.size()));
    ip.stages.push_back({0.0, b, h, 2.0, demand, w});
    ip.grid_min = -2;
    ip.grid_max = 2;
    return ip;
}

std::vector<AmbiguitySpec> singletons(const InventoryParams& ip) {
    std::vector<AmbiguitySpec> out;
    for (const auto& q : inventory_reference(ip)) out.push_back(Singleton{q});
    return out;
}

InventoryParams two_stage_cvar_params() {
    InventoryParams ip;
    for (int t = 0; t < 2; ++t) ip.stages.push_back({0.0, 1.0, 1.0, 2.0, {0, 1, 2}, {1 / 3., 1 / 3., 1 / 3.}});
    ip.grid_min = -4;
    ip.grid_max = 4;
    return ip;
}

std::vector<AmbiguitySpec> cvar_sets(const InventoryParams& ip, double alpha) {
    std::vector<AmbiguitySpec> out;
    for (const auto& q : inventory_reference(ip)) out.push_back(CvarBall{q, alpha});
    return out;
}

} // namespace

TEST(Inventory, SymmetricCostsOrderTheMedian) {
    const auto ip = one_stage(1.0, 1.0);
    const auto p = build_inventory(ip, singletons(ip));
    const auto s = solve_nonrandomized(p, build_scenario_tree(p));
    EXPECT_NEAR(s.values.at(0, 0), 2.0 / 3.0, 1e-12);
    EXPECT_EQ(s.policy.control.at(0, 0), 1);
}

TEST(Inventory, BackorderOnlyOrdersTheMaximum) {
    // with u = 2 every demand is covered and holding is free
    const auto ip = one_stage(1.0, 0.0);
    const auto p = build_inventory(ip, singletons(ip));
    const auto s = solve_nonrandomized(p, build_scenario_tree(p));
    EXPECT_NEAR(s.values.at(0, 0), 0.0, 1e-12);
    EXPECT_EQ(s.policy.control.at(0, 0), 2);
}

TEST(Inventory, ZeroDemandOrdersNothing) {
    const auto ip = one_stage(1.0, 1.0, {0});
    const auto p = build_inventory(ip, singletons(ip));
    const auto s = solve_nonrandomized(p, build_scenario_tree(p));
    EXPECT_EQ(s.values.at(0, 0), 0.0);
    EXPECT_EQ(s.policy.control.at(0, 0), 0);
}

TEST(Inventory, StatesAreReachableLevels) {
    const auto ip = two_stage_cvar_params();
    EXPECT_EQ(inventory_levels(ip, 1), std::vector<double>({0}));
    EXPECT_EQ(inventory_levels(ip, 2), std::vector<double>({-2, -1, 0, 1, 2}));
    EXPECT_EQ(inventory_levels(ip, 3), std::vector<double>({-4, -3, -2, -1, 0, 1, 2, 3, 4}));
    const auto p = build_inventory(ip, cvar_sets(ip, 0.5));
    EXPECT_TRUE(validate_problem(p).empty());
    EXPECT_EQ(p.stages[1].states, 5u);
    EXPECT_EQ(p.terminal_cost.size(), 9u);
}

TEST(Inventory, TransitionsAreExact) {
    auto ip = two_stage_cvar_params();
    ip.grid_step = 0.25;
    for (auto& s : ip.stages) {
        s.demand = {0.0, 0.25, 0.75};
        s.order_cap = 0.5;
    }
    ip.grid_min = -1.5;
    ip.grid_max = 1.0;
    const auto p = build_inventory(ip, singletons(ip));
    for (std::size_t t = 1; t <= 2; ++t) {
        const auto here = inventory_levels(ip, t);
        const auto next = inventory_levels(ip, t + 1);
        const StageModel& sm = p.stages[t - 1];
        for (std::size_t x = 0; x < sm.states; ++x)
            for (std::size_t u = 0; u < sm.controls; ++u)
                for (std::size_t a = 0; a < sm.atoms; ++a)
                    EXPECT_EQ(next[sm.next_state(x, u, a)],
                              here[x] + static_cast<double>(u) * ip.grid_step - ip.stages[t - 1].demand[a]);
    }
}

TEST(Inventory, LatticeViolationsAreRejected) {
    auto ip = one_stage(1.0, 1.0, {0, 1.5, 2});
    try {
        build_inventory(ip, singletons(ip));
        FAIL() << "expected a lattice error";
    } catch (const InputError& e) {
        EXPECT_NE(std::string(e.what()).find("demand atom 1"), std::string::npos);
    }
    auto cap = one_stage(1.0, 1.0);
    cap.stages[0].order_cap = 1.5;
    EXPECT_THROW(build_inventory(cap, singletons(cap)), InputError);

    auto narrow = one_stage(1.0, 1.0);
    narrow.grid_min = -1;
    EXPECT_THROW(build_inventory(narrow, singletons(narrow)), InputError);

    auto negative = one_stage(1.0, 1.0, {-1, 0});
    EXPECT_THROW(build_inventory(negative, singletons(negative)), InputError);

    auto costs = one_stage(-1.0, 1.0);
    EXPECT_THROW(build_inventory(costs, singletons(costs)), InputError);
}

TEST(Inventory, ConvexAmbiguityHasPurePolicy) {
    const auto ip = two_stage_cvar_params();
    const auto p = build_inventory(ip, cvar_sets(ip, 0.5));
    const auto tree = build_scenario_tree(p);
    const auto r = existence_report(p, tree);
    EXPECT_TRUE(r.nonrandomized_exists);
    EXPECT_TRUE(r.pure_policy_certified);
    for (std::size_t t = 1; t <= 3; ++t)
        for (const auto& n : tree.stage(t)) {
            const auto& v = r.pure.values[n.id];
            for (std::size_t x = 1; x + 1 < v.size(); ++x) EXPECT_GE(v[x - 1] - 2 * v[x] + v[x + 1], -1e-7);
        }
    EXPECT_NEAR(evaluate_policy_nested(p, tree, r.pure.policy).nested_value, r.root_mixed(), 1e-7);
}

TEST(Inventory, StagewiseSolveMatchesTree) {
    const auto ip = two_stage_cvar_params();
    const auto p = build_inventory(ip, cvar_sets(ip, 0.5));
    const auto tree = build_scenario_tree(p);
    const auto sw = solve_stagewise(p);
    const auto pure = solve_nonrandomized(p, tree);
    for (std::size_t t = 1; t <= 3; ++t)
        for (const auto& n : tree.stage(t))
            for (std::size_t x = 0; x < p.state_count(t); ++x) EXPECT_NEAR(sw.pure[t - 1][x], pure.values[n.id][x], 1e-9);
}

TEST(NoSaddle, ReportsTheGap) {
    const auto p = build_no_saddle_example();
    EXPECT_TRUE(validate_problem(p).empty());
    const auto r = existence_report(p, build_scenario_tree(p));
    EXPECT_NEAR(r.root_pure(), 1.0, 1e-9);
    EXPECT_NEAR(r.root_mixed(), 0.5, 1e-9);
    EXPECT_NEAR(r.root_dual(), 0.5, 1e-9);
    EXPECT_NEAR(r.max_gap, 0.5, 1e-9);
    EXPECT_FALSE(r.nonrandomized_exists);
    EXPECT_NEAR(r.mixed.policy.control.at(0, 0)[0], 0.5, 1e-9);
}

TEST(NoSaddle, SingletonRemovesTheGap) {
    auto p = build_no_saddle_example();
    p.ambiguity = StagewiseAmbiguity{{Singleton{FiniteDistribution({0.5, 0.5})}}};
    const auto r = existence_report(p, build_scenario_tree(p));
    EXPECT_TRUE(r.nonrandomized_exists);
    EXPECT_NEAR(r.max_gap, 0.0, 1e-12);
    EXPECT_EQ(r.pure.policy.control.at(0, 0), 0);
}
