#pragma once

#include "drsoc/game.hpp"
#include "drsoc/problem.hpp"
#include "drsoc/scenario_tree.hpp"

#include <cstddef>
#include <vector>

namespace drsoc {

struct SolveOptions {
    /// Saddle and duality tolerance.
    double tol = kSaddleTol;
    /// Worker threads for the games of one stage; 0 picks the hardware count.
    unsigned threads = 0;
};

/// Game matrix at (node, state): cost(x, u, i) + next[child i][F(x, u, i)].
/// All three recursions build their node games through this function.
GameMatrix build_game_matrix(const Problem& problem, const ScenarioTree& tree, const HistoryNode& node, std::size_t state,
                             const ValueTable& next);

/// A value table with only the terminal rows filled (other rows zero).
ValueTable terminal_values(const Problem& problem, const ScenarioTree& tree);

/// One AmbiguitySet per non-leaf node (shared between nodes for stagewise sets).
std::vector<const AmbiguitySet*> node_sets(const Problem& problem, const ScenarioTree& tree,
                                           std::vector<AmbiguitySet>& storage);

struct PureSolution {
    ValueTable values;
    PurePolicy policy;
    /// Nature's worst case against the chosen control.
    NatureStrategy nature;
};

struct MixedSolution {
    ValueTable values;
    MixedPolicy policy;
    NatureStrategy nature;
};

struct DualSolution {
    ValueTable values;
    NatureStrategy nature;
    /// Controller's best pure response to nature's measure.
    PurePolicy responses;
};

/// Backward recursion with pure controls (controller moves first).
PureSolution solve_nonrandomized(const Problem& problem, const ScenarioTree& tree, const SolveOptions& opts = {});
/// Backward recursion with mixed controls.
MixedSolution solve_randomized(const Problem& problem, const ScenarioTree& tree, const SolveOptions& opts = {});
/// Backward recursion where nature commits first.
DualSolution solve_dual(const Problem& problem, const ScenarioTree& tree, const SolveOptions& opts = {});

struct NodeFailure {
    NodeState at;
    double gap = 0.0;
};

/**
 * All three recursions plus the saddle diagnostics. The per-pair games in
 * `games` are built from the pure continuation values, which is the game whose
 * saddle points decide whether a non-randomized optimal policy exists.
 */
struct SolveReport {
    PureSolution pure;
    MixedSolution mixed;
    DualSolution dual;
    NodeTable<NodeGameResult> games;
    /// Pairs reachable from the root under the pure control or any control in
    /// the support of the mixed policy, with nature free to pick any atom.
    NodeTable<char> reachable;
    double tol = kSaddleTol;
    std::size_t initial_state = 0;
    /// max over all pairs of |V - Q|.
    double max_duality_gap = 0.0;
    bool duality_holds = false;
    /// Saddle points at every reachable pair.
    bool nonrandomized_exists = false;
    /// Saddle points at every pair of the tree.
    bool nonrandomized_exists_all_pairs = false;
    /// nonrandomized_exists and the pure value equals the randomized one at the root.
    bool pure_policy_certified = false;
    /// Largest pure - dual gap of a reachable node game.
    double max_gap = 0.0;
    double max_gap_all_pairs = 0.0;
    /// Reachable pairs without a saddle point, in tree order.
    std::vector<NodeFailure> failing;

    double root_pure() const;
    double root_mixed() const;
    double root_dual() const;
};

SolveReport existence_report(const Problem& problem, const ScenarioTree& tree, const SolveOptions& opts = {});

/// Values indexed by (stage, state) for stagewise ambiguity; stage T+1 holds
/// the terminal cost.
struct StagewiseSolution {
    std::vector<std::vector<double>> pure;
    std::vector<std::vector<double>> mixed;
    std::vector<std::vector<double>> dual;
    std::vector<std::vector<int>> policy;
};

/// Throws InputError when the problem's ambiguity is not stagewise.
StagewiseSolution solve_stagewise(const Problem& problem);

} // namespace drsoc
