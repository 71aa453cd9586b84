#pragma once

#include "drsoc/dp.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>

namespace drsoc {

/// Cap on the number of vertex products examined by the static evaluation.
inline constexpr std::size_t kDefaultProductBudget = 10000;

/// Identifier of the rollout random stream, echoed in reports.
inline constexpr const char* kRolloutRngId = "mt19937_64+splitmix64-blocks/v1";

/// Samples drawn per rollout block; each block has its own derived seed.
inline constexpr std::size_t kRolloutBlockSize = 4096;

struct RolloutStats {
    double mean = 0.0;
    double std_error = 0.0;
    std::size_t samples = 0;
    std::uint64_t seed = 0;
    std::string rng = kRolloutRngId;
};

struct EvaluationResult {
    double nested_value = 0.0;
    /// Nested value of the remaining cost from each (node, state); NaN where the
    /// policy leaves a pair undefined.
    ValueTable conditional;
    std::optional<double> static_value;
    std::optional<RolloutStats> rollout;
};

/// Composes the per-node worst-case expectations backward along the policy.
/// Throws InputError when the policy has no control at a reachable pair.
EvaluationResult evaluate_policy_nested(const Problem& problem, const ScenarioTree& tree, const PurePolicy& policy);

/**
 * Worst case of E[Z] over products of per-stage measures. The expectation is
 * multilinear in the stage measures, so it suffices to search products of
 * generating measures. Requires stagewise ambiguity; throws InputError when
 * the number of products exceeds `budget`.
 */
double evaluate_policy_static_worstcase(const Problem& problem, const ScenarioTree& tree, const PurePolicy& policy,
                                        std::size_t budget = kDefaultProductBudget);

/// Nature measure per (node, state) from one measure per non-leaf node.
NatureStrategy nature_per_node(const Problem& problem, const ScenarioTree& tree,
                               const std::vector<FiniteDistribution>& per_node);

/// Exact expected total cost from the root under a fixed nature strategy.
double expected_cost(const Problem& problem, const ScenarioTree& tree, const PurePolicy& policy,
                     const NatureStrategy& nature);
double expected_cost(const Problem& problem, const ScenarioTree& tree, const MixedPolicy& policy,
                     const NatureStrategy& nature);

struct RolloutOptions {
    std::size_t samples = 100000;
    std::uint64_t seed = 0;
    /// 0 picks the hardware count. Results do not depend on it.
    unsigned threads = 0;
};

/// Samples trajectories from the root. Throws InputError when a visited pair
/// lacks a control or nature measure.
RolloutStats monte_carlo_rollout(const Problem& problem, const ScenarioTree& tree, const PurePolicy& policy,
                                 const NatureStrategy& nature, const RolloutOptions& opts);
RolloutStats monte_carlo_rollout(const Problem& problem, const ScenarioTree& tree, const MixedPolicy& policy,
                                 const NatureStrategy& nature, const RolloutOptions& opts);

} // namespace drsoc
