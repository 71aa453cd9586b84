#include "drsoc/dp.hpp"

#include "drsoc/errors.hpp"
#include "parallel.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace drsoc {

namespace {

std::string where(const HistoryNode& n, std::size_t x) {
    std::ostringstream os;
    os << "(t=" << n.stage << ", node \"" << path_key(n.path) << "\", state=" << x << ")";
    return os.str();
}

// Runs fn(node, state, set) over every non-leaf (node, state) pair, stage by
// stage from T down to 1. Pairs of one stage run concurrently.
template <class Fn>
void backward(const Problem& problem, const ScenarioTree& tree, const SolveOptions& opts,
              const std::vector<const AmbiguitySet*>& sets, Fn&& fn) {
    for (std::size_t t = problem.horizon(); t >= 1; --t) {
        const auto nodes = tree.stage(t);
        const std::size_t n_states = problem.state_count(t);
        detail::parallel_for(nodes.size() * n_states, opts.threads, [&](std::size_t i) {
            const HistoryNode& node = nodes[i / n_states];
            const std::size_t x = i % n_states;
            try {
                fn(node, x, *sets[node.id]);
            } catch (const InputError& e) {
                throw InputError(std::string(e.what()) + " at " + where(node, x));
            } catch (const SolverError& e) {
                throw SolverError(std::string(e.what()) + " at " + where(node, x));
            }
        });
    }
}

} // namespace

GameMatrix build_game_matrix(const Problem& problem, const ScenarioTree& tree, const HistoryNode& node, std::size_t state,
                             const ValueTable& next) {
    (void)tree;
    const StageModel& sm = problem.stages[node.stage - 1];
    GameMatrix m(sm.controls, sm.atoms);
    for (std::size_t u = 0; u < sm.controls; ++u)
        for (std::size_t a = 0; a < sm.atoms; ++a)
            m(u, a) = sm.stage_cost(state, u, a) + next[node.child(a)][sm.next_state(state, u, a)];
    return m;
}

ValueTable terminal_values(const Problem& problem, const ScenarioTree& tree) {
    ValueTable v(tree, problem, 0.0);
    for (const auto& leaf : tree.stage(problem.horizon() + 1)) v[leaf.id] = problem.terminal_cost;
    return v;
}

std::vector<const AmbiguitySet*> node_sets(const Problem& problem, const ScenarioTree& tree,
                                           std::vector<AmbiguitySet>& storage) {
    std::vector<const AmbiguitySet*> out(tree.size(), nullptr);
    storage.clear();
    if (const auto* sw = std::get_if<StagewiseAmbiguity>(&problem.ambiguity)) {
        storage.reserve(sw->stages.size());
        for (const auto& spec : sw->stages) storage.emplace_back(spec);
        for (std::size_t t = 1; t <= problem.horizon(); ++t)
            for (const auto& n : tree.stage(t)) out[n.id] = &storage[t - 1];
    } else {
        std::size_t inner = 0;
        for (std::size_t t = 1; t <= problem.horizon(); ++t) inner += tree.stage(t).size();
        storage.reserve(inner);
        for (std::size_t t = 1; t <= problem.horizon(); ++t)
            for (const auto& n : tree.stage(t)) {
                storage.emplace_back(problem.spec_at(n.path));
                out[n.id] = &storage.back();
            }
    }
    return out;
}

PureSolution solve_nonrandomized(const Problem& problem, const ScenarioTree& tree, const SolveOptions& opts) {
    std::vector<AmbiguitySet> storage;
    const auto sets = node_sets(problem, tree, storage);
    PureSolution s{terminal_values(problem, tree), PurePolicy{NodeTable<int>(tree, problem, kNoControl)},
                   NatureStrategy(tree, problem)};
    backward(problem, tree, opts, sets, [&](const HistoryNode& n, std::size_t x, const AmbiguitySet& set) {
        auto r = controller_value_pure(build_game_matrix(problem, tree, n, x, s.values), set);
        s.values[n.id][x] = r.value;
        s.policy.control[n.id][x] = static_cast<int>(r.control);
        s.nature[n.id][x] = std::move(r.nature);
    });
    return s;
}

MixedSolution solve_randomized(const Problem& problem, const ScenarioTree& tree, const SolveOptions& opts) {
    std::vector<AmbiguitySet> storage;
    const auto sets = node_sets(problem, tree, storage);
    MixedSolution s{terminal_values(problem, tree), MixedPolicy{NodeTable<FiniteDistribution>(tree, problem)},
                    NatureStrategy(tree, problem)};
    backward(problem, tree, opts, sets, [&](const HistoryNode& n, std::size_t x, const AmbiguitySet& set) {
        auto r = mixed_value(build_game_matrix(problem, tree, n, x, s.values), set);
        s.values[n.id][x] = r.value;
        s.policy.control[n.id][x] = std::move(r.controller);
        s.nature[n.id][x] = std::move(r.nature);
    });
    return s;
}

DualSolution solve_dual(const Problem& problem, const ScenarioTree& tree, const SolveOptions& opts) {
    std::vector<AmbiguitySet> storage;
    const auto sets = node_sets(problem, tree, storage);
    DualSolution s{terminal_values(problem, tree), NatureStrategy(tree, problem),
                   PurePolicy{NodeTable<int>(tree, problem, kNoControl)}};
    backward(problem, tree, opts, sets, [&](const HistoryNode& n, std::size_t x, const AmbiguitySet& set) {
        auto r = nature_value(build_game_matrix(problem, tree, n, x, s.values), set);
        s.values[n.id][x] = r.value;
        s.nature[n.id][x] = std::move(r.nature);
        s.responses.control[n.id][x] = static_cast<int>(r.responses.front());
    });
    return s;
}

double SolveReport::root_pure() const { return pure.values.at(0, initial_state); }
double SolveReport::root_mixed() const { return mixed.values.at(0, initial_state); }
double SolveReport::root_dual() const { return dual.values.at(0, initial_state); }

SolveReport existence_report(const Problem& problem, const ScenarioTree& tree, const SolveOptions& opts) {
    SolveReport r;
    r.tol = opts.tol;
    r.initial_state = problem.initial_state;
    r.pure = solve_nonrandomized(problem, tree, opts);
    r.mixed = solve_randomized(problem, tree, opts);
    r.dual = solve_dual(problem, tree, opts);

    std::vector<AmbiguitySet> storage;
    const auto sets = node_sets(problem, tree, storage);
    r.games = NodeTable<NodeGameResult>(tree, problem);
    backward(problem, tree, opts, sets, [&](const HistoryNode& n, std::size_t x, const AmbiguitySet& set) {
        r.games[n.id][x] = solve_node_game(build_game_matrix(problem, tree, n, x, r.pure.values), set, opts.tol);
    });

    r.reachable = reachable_pairs(problem, tree, [&](std::size_t node, std::size_t x) {
        std::vector<std::size_t> controls{static_cast<std::size_t>(r.pure.policy.control[node][x])};
        const FiniteDistribution& mu = r.mixed.policy.control[node][x];
        for (std::size_t u = 0; u < mu.size(); ++u)
            if (mu[u] > 0.0 && u != controls.front()) controls.push_back(u);
        return controls;
    });

    r.nonrandomized_exists = true;
    r.nonrandomized_exists_all_pairs = true;
    for (std::size_t t = 1; t <= problem.horizon(); ++t) {
        for (const auto& n : tree.stage(t)) {
            for (std::size_t x = 0; x < problem.state_count(t); ++x) {
                const NodeGameResult& g = r.games[n.id][x];
                r.max_duality_gap = std::max(r.max_duality_gap, std::abs(r.mixed.values[n.id][x] - r.dual.values[n.id][x]));
                r.max_gap_all_pairs = std::max(r.max_gap_all_pairs, g.gap);
                if (!g.saddle) r.nonrandomized_exists_all_pairs = false;
                if (!r.reachable[n.id][x]) continue;
                r.max_gap = std::max(r.max_gap, g.gap);
                if (!g.saddle) {
                    r.nonrandomized_exists = false;
                    r.failing.push_back({NodeState{n.id, x}, g.gap});
                }
            }
        }
    }
    r.duality_holds = r.max_duality_gap <= opts.tol;
    r.pure_policy_certified = r.nonrandomized_exists && std::abs(r.root_pure() - r.root_mixed()) <= opts.tol;
    return r;
}

StagewiseSolution solve_stagewise(const Problem& problem) {
    const auto* sw = std::get_if<StagewiseAmbiguity>(&problem.ambiguity);
    if (!sw) throw InputError("solve_stagewise: ambiguity is assigned per node, not stagewise");
    const std::size_t T = problem.horizon();
    StagewiseSolution s;
    s.pure.resize(T + 1);
    s.mixed.resize(T + 1);
    s.dual.resize(T + 1);
    s.policy.resize(T);
    s.pure[T] = s.mixed[T] = s.dual[T] = problem.terminal_cost;
    for (std::size_t t = T; t >= 1; --t) {
        const StageModel& sm = problem.stages[t - 1];
        const AmbiguitySet set(sw->stages[t - 1]);
        auto matrix = [&](std::size_t x, const std::vector<double>& next) {
            GameMatrix m(sm.controls, sm.atoms);
            for (std::size_t u = 0; u < sm.controls; ++u)
                for (std::size_t a = 0; a < sm.atoms; ++a) m(u, a) = sm.stage_cost(x, u, a) + next[sm.next_state(x, u, a)];
            return m;
        };
        s.pure[t - 1].resize(sm.states);
        s.mixed[t - 1].resize(sm.states);
        s.dual[t - 1].resize(sm.states);
        s.policy[t - 1].resize(sm.states);
        for (std::size_t x = 0; x < sm.states; ++x) {
            const auto pure = controller_value_pure(matrix(x, s.pure[t]), set);
            s.pure[t - 1][x] = pure.value;
            s.policy[t - 1][x] = static_cast<int>(pure.control);
            s.mixed[t - 1][x] = mixed_value(matrix(x, s.mixed[t]), set).value;
            s.dual[t - 1][x] = nature_value(matrix(x, s.dual[t]), set).value;
        }
    }
    return s;
}

} // namespace drsoc
