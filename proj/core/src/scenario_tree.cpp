#include "drsoc/scenario_tree.hpp"

#include "drsoc/errors.hpp"

#include <algorithm>

namespace drsoc {

std::optional<std::size_t> ScenarioTree::find(const Path& path) const {
    if (nodes_.empty() || path.size() > horizon()) return std::nullopt;
    std::size_t id = 0;
    for (int a : path) {
        const HistoryNode& n = nodes_[id];
        if (a < 0 || static_cast<std::size_t>(a) >= n.child_count) return std::nullopt;
        id = n.child(static_cast<std::size_t>(a));
    }
    return id;
}

ScenarioTree build_scenario_tree(const Problem& problem, std::size_t budget) {
    const std::size_t T = problem.horizon();
    if (T == 0) throw InputError("build_scenario_tree: empty horizon");
    for (const auto& s : problem.stages) {
        if (s.atoms == 0) throw InputError("build_scenario_tree: stage without atoms");
    }
    // count (node, state) pairs before allocating anything
    std::size_t width = 1;
    std::size_t pairs = problem.state_count(1);
    std::size_t node_count = 1;
    for (std::size_t t = 1; t <= T; ++t) {
        const std::size_t k = problem.stages[t - 1].atoms;
        const std::size_t per_state = std::max<std::size_t>(1, problem.state_count(t + 1));
        if (width > budget / k || width * k > budget / per_state) {
            throw InputError("tree too large: more than the budget of " + std::to_string(budget) + " (node, state) pairs");
        }
        width *= k;
        node_count += width;
        pairs += width * per_state;
        if (pairs > budget) {
            throw InputError("tree too large: " + std::to_string(pairs) + " (node, state) pairs exceed the budget of " +
                             std::to_string(budget));
        }
    }

    std::vector<HistoryNode> nodes;
    nodes.reserve(node_count);
    std::vector<std::size_t> begin{0};
    nodes.push_back(HistoryNode{0, 1, {}, std::nullopt, 0, 0});
    for (std::size_t t = 1; t <= T; ++t) {
        const std::size_t k = problem.stages[t - 1].atoms;
        const std::size_t first = begin.back();
        const std::size_t last = nodes.size();
        begin.push_back(last);
        for (std::size_t id = first; id < last; ++id) {
            nodes[id].first_child = nodes.size();
            nodes[id].child_count = k;
            for (std::size_t a = 0; a < k; ++a) {
                HistoryNode c;
                c.id = nodes.size();
                c.stage = t + 1;
                c.path = nodes[id].path;
                c.path.push_back(static_cast<int>(a));
                c.parent = id;
                nodes.push_back(std::move(c));
            }
        }
    }
    begin.push_back(nodes.size());
    return ScenarioTree(std::move(nodes), std::move(begin));
}

std::optional<NodeState> uncovered_pair(const Problem& problem, const ScenarioTree& tree, const PurePolicy& policy) {
    // walk forward along defined controls, stopping at the first gap
    NodeTable<char> mask(tree, problem, 0);
    mask.at(0, problem.initial_state) = 1;
    for (std::size_t t = 1; t <= problem.horizon(); ++t) {
        const StageModel& sm = problem.stages[t - 1];
        for (const auto& n : tree.stage(t)) {
            for (std::size_t x = 0; x < sm.states; ++x) {
                if (!mask[n.id][x]) continue;
                const int u = n.id < policy.control.size() && x < policy.control[n.id].size() ? policy.control[n.id][x]
                                                                                                 : kNoControl;
                if (u < 0 || static_cast<std::size_t>(u) >= sm.controls) return NodeState{n.id, x};
                for (std::size_t a = 0; a < sm.atoms; ++a)
                    mask[n.child(a)][sm.next_state(x, static_cast<std::size_t>(u), a)] = 1;
            }
        }
    }
    return std::nullopt;
}

std::optional<NodeState> uncovered_pair(const Problem& problem, const ScenarioTree& tree, const MixedPolicy& policy) {
    NodeTable<char> mask(tree, problem, 0);
    mask.at(0, problem.initial_state) = 1;
    for (std::size_t t = 1; t <= problem.horizon(); ++t) {
        const StageModel& sm = problem.stages[t - 1];
        for (const auto& n : tree.stage(t)) {
            for (std::size_t x = 0; x < sm.states; ++x) {
                if (!mask[n.id][x]) continue;
                if (n.id >= policy.control.size() || x >= policy.control[n.id].size()) return NodeState{n.id, x};
                const FiniteDistribution& mu = policy.control[n.id][x];
                if (mu.size() != sm.controls || !mu.valid()) return NodeState{n.id, x};
                for (std::size_t u = 0; u < sm.controls; ++u) {
                    if (mu[u] <= 0.0) continue;
                    for (std::size_t a = 0; a < sm.atoms; ++a) mask[n.child(a)][sm.next_state(x, u, a)] = 1;
                }
            }
        }
    }
    return std::nullopt;
}

} // namespace drsoc
