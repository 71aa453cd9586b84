#pragma once

#include "drsoc/path.hpp"
#include "drsoc/problem.hpp"

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace drsoc {

/// Default cap on (node, state) pairs held by a tree.
inline constexpr std::size_t kDefaultNodeBudget = 200000;

struct HistoryNode {
    std::size_t id = 0;
    std::size_t stage = 1; ///< 1..T+1; stage T+1 nodes are leaves
    Path path;             ///< length stage - 1
    std::optional<std::size_t> parent;
    std::size_t first_child = 0;
    std::size_t child_count = 0;

    bool leaf() const { return child_count == 0; }
    std::size_t child(std::size_t atom) const { return first_child + atom; }
};

/// All histories of the noise process, stored breadth first with children
/// ordered by atom index. Node ids are contiguous per stage.
class ScenarioTree {
public:
    ScenarioTree() = default;
    ScenarioTree(std::vector<HistoryNode> nodes, std::vector<std::size_t> stage_begin)
        : nodes_(std::move(nodes)), stage_begin_(std::move(stage_begin)) {}

    std::size_t size() const { return nodes_.size(); }
    std::size_t horizon() const { return stage_begin_.size() - 2; }
    const HistoryNode& root() const { return nodes_.front(); }
    const HistoryNode& node(std::size_t id) const { return nodes_[id]; }
    std::span<const HistoryNode> nodes() const { return nodes_; }
    /// Nodes of stage t in 1..T+1.
    std::span<const HistoryNode> stage(std::size_t t) const {
        return std::span<const HistoryNode>(nodes_).subspan(stage_begin_[t - 1], stage_begin_[t] - stage_begin_[t - 1]);
    }
    std::optional<std::size_t> find(const Path& path) const;

private:
    std::vector<HistoryNode> nodes_;
    std::vector<std::size_t> stage_begin_; // T + 2 offsets
};

/// Materializes the tree. Throws InputError("tree too large ...") when the
/// number of (node, state) pairs exceeds `budget`.
ScenarioTree build_scenario_tree(const Problem& problem, std::size_t budget = kDefaultNodeBudget);

/// Per (node, state) storage shaped like a problem's tree: row `id` has
/// state_count(stage of node id) entries.
template <class T>
class NodeTable {
public:
    NodeTable() = default;
    NodeTable(const ScenarioTree& tree, const Problem& problem, const T& fill = T{}) {
        rows_.reserve(tree.size());
        for (const auto& n : tree.nodes()) rows_.emplace_back(problem.state_count(n.stage), fill);
    }

    std::size_t size() const { return rows_.size(); }
    std::vector<T>& operator[](std::size_t node) { return rows_[node]; }
    const std::vector<T>& operator[](std::size_t node) const { return rows_[node]; }
    T& at(std::size_t node, std::size_t state) { return rows_.at(node).at(state); }
    const T& at(std::size_t node, std::size_t state) const { return rows_.at(node).at(state); }

    bool operator==(const NodeTable&) const = default;

private:
    std::vector<std::vector<T>> rows_;
};

/// Values per (node, state); stage T+1 rows hold the terminal cost.
using ValueTable = NodeTable<double>;

inline constexpr int kNoControl = -1;

/// Control index per (node, state); kNoControl where undefined. Leaf rows unused.
struct PurePolicy {
    NodeTable<int> control;
};

/// Control distribution per (node, state); an empty distribution is undefined.
struct MixedPolicy {
    NodeTable<FiniteDistribution> control;
};

/// Nature's measure per (node, state).
using NatureStrategy = NodeTable<FiniteDistribution>;

struct NodeState {
    std::size_t node = 0;
    std::size_t state = 0;
    bool operator==(const NodeState&) const = default;
};

/// Pairs reachable from (root, initial state) when at each visited pair the
/// controls in `controls(node, state)` may be played and nature may pick any
/// atom. Returned as a per-node mask.
template <class Controls>
NodeTable<char> reachable_pairs(const Problem& problem, const ScenarioTree& tree, Controls&& controls) {
    NodeTable<char> mask(tree, problem, 0);
    mask.at(0, problem.initial_state) = 1;
    for (std::size_t t = 1; t <= problem.horizon(); ++t) {
        const StageModel& sm = problem.stages[t - 1];
        for (const auto& n : tree.stage(t)) {
            for (std::size_t x = 0; x < sm.states; ++x) {
                if (!mask[n.id][x]) continue;
                for (std::size_t u : controls(n.id, x)) {
                    for (std::size_t a = 0; a < sm.atoms; ++a) mask[n.child(a)][sm.next_state(x, u, a)] = 1;
                }
            }
        }
    }
    return mask;
}

/// First reachable pair (in tree order) where the policy has no control.
std::optional<NodeState> uncovered_pair(const Problem& problem, const ScenarioTree& tree, const PurePolicy& policy);
std::optional<NodeState> uncovered_pair(const Problem& problem, const ScenarioTree& tree, const MixedPolicy& policy);

} // namespace drsoc
