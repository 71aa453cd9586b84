#include "drsoc/nested.hpp"

#include "drsoc/errors.hpp"
#include "parallel.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <sstream>

namespace drsoc {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string describe(const Problem& problem, const ScenarioTree& tree, NodeState at) {
    (void)problem;
    const HistoryNode& n = tree.node(at.node);
    std::ostringstream os;
    os << "(t=" << n.stage << ", node \"" << path_key(n.path) << "\", state=" << at.state << ")";
    return os.str();
}

template <class Table>
void require_shape(const Problem& problem, const ScenarioTree& tree, const Table& table, const char* what) {
    bool ok = table.size() == tree.size();
    for (std::size_t i = 0; ok && i < tree.size(); ++i)
        ok = table[i].size() == problem.state_count(tree.node(i).stage);
    if (!ok) throw InputError(std::string(what) + " does not match the scenario tree");
}

MixedPolicy as_mixed(const Problem& problem, const ScenarioTree& tree, const PurePolicy& policy) {
    require_shape(problem, tree, policy.control, "policy");
    MixedPolicy out{NodeTable<FiniteDistribution>(tree, problem)};
    for (std::size_t t = 1; t <= problem.horizon(); ++t) {
        const std::size_t m = problem.stages[t - 1].controls;
        for (const auto& n : tree.stage(t))
            for (std::size_t x = 0; x < problem.state_count(t); ++x) {
                const int u = policy.control[n.id][x];
                if (u >= 0 && static_cast<std::size_t>(u) < m)
                    out.control[n.id][x] = FiniteDistribution::point_mass(m, static_cast<std::size_t>(u));
            }
    }
    return out;
}

bool usable(const FiniteDistribution& d, std::size_t size) { return d.size() == size && d.valid(); }

// Pairs reachable under the support of the policy, with every atom possible.
// Throws when a reachable pair lacks a usable control law or nature measure.
NodeTable<char> checked_reach(const Problem& problem, const ScenarioTree& tree, const MixedPolicy& policy,
                              const NatureStrategy* nature) {
    require_shape(problem, tree, policy.control, "policy");
    if (nature) require_shape(problem, tree, *nature, "nature strategy");
    NodeTable<char> mask(tree, problem, 0);
    mask.at(0, problem.initial_state) = 1;
    for (std::size_t t = 1; t <= problem.horizon(); ++t) {
        const StageModel& sm = problem.stages[t - 1];
        for (const auto& n : tree.stage(t)) {
            for (std::size_t x = 0; x < sm.states; ++x) {
                if (!mask[n.id][x]) continue;
                const auto& mu = policy.control[n.id][x];
                if (!usable(mu, sm.controls))
                    throw InputError("policy has no valid control at " + describe(problem, tree, {n.id, x}));
                if (nature && !usable((*nature)[n.id][x], sm.atoms))
                    throw InputError("nature strategy has no valid measure at " + describe(problem, tree, {n.id, x}));
                for (std::size_t u = 0; u < sm.controls; ++u) {
                    if (mu[u] <= 0.0) continue;
                    for (std::size_t a = 0; a < sm.atoms; ++a) mask[n.child(a)][sm.next_state(x, u, a)] = 1;
                }
            }
        }
    }
    return mask;
}

std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

std::size_t sample_index(const FiniteDistribution& d, double u) {
    double cum = 0.0;
    std::size_t last = 0;
    for (std::size_t i = 0; i < d.size(); ++i) {
        if (d[i] <= 0.0) continue;
        cum += d[i];
        last = i;
        if (u < cum) return i;
    }
    return last;
}

struct Moments {
    std::size_t n = 0;
    double mean = 0.0;
    double m2 = 0.0;

    void add(double v) {
        ++n;
        const double d = v - mean;
        mean += d / static_cast<double>(n);
        m2 += d * (v - mean);
    }
    void merge(const Moments& o) {
        if (o.n == 0) return;
        const double total = static_cast<double>(n + o.n);
        const double d = o.mean - mean;
        mean += d * static_cast<double>(o.n) / total;
        m2 += o.m2 + d * d * static_cast<double>(n) * static_cast<double>(o.n) / total;
        n += o.n;
    }
};

RolloutStats rollout(const Problem& problem, const ScenarioTree& tree, const MixedPolicy& policy,
                     const NatureStrategy& nature, const RolloutOptions& opts) {
    if (opts.samples == 0) throw InputError("rollout needs at least one sample");
    checked_reach(problem, tree, policy, &nature);

    const std::size_t blocks = (opts.samples + kRolloutBlockSize - 1) / kRolloutBlockSize;
    std::vector<std::uint64_t> seeds(blocks);
    std::uint64_t state = opts.seed;
    for (auto& s : seeds) s = splitmix64(state);

    std::vector<Moments> parts(blocks);
    detail::parallel_for(blocks, opts.threads, [&](std::size_t b) {
        std::mt19937_64 rng(seeds[b]);
        const std::size_t count = std::min(kRolloutBlockSize, opts.samples - b * kRolloutBlockSize);
        Moments& acc = parts[b];
        for (std::size_t s = 0; s < count; ++s) {
            std::size_t node = 0;
            std::size_t x = problem.initial_state;
            double total = 0.0;
            for (std::size_t t = 1; t <= problem.horizon(); ++t) {
                const StageModel& sm = problem.stages[t - 1];
                const std::size_t u = sample_index(policy.control[node][x], uniform01(rng));
                const std::size_t a = sample_index(nature[node][x], uniform01(rng));
                total += sm.stage_cost(x, u, a);
                x = sm.next_state(x, u, a);
                node = tree.node(node).child(a);
            }
            acc.add(total + problem.terminal_cost[x]);
        }
    });

    Moments all;
    for (const auto& p : parts) all.merge(p);
    RolloutStats out;
    out.samples = all.n;
    out.seed = opts.seed;
    out.mean = all.mean;
    out.std_error = all.n > 1 ? std::sqrt(all.m2 / static_cast<double>(all.n - 1) / static_cast<double>(all.n)) : 0.0;
    return out;
}

double expected(const Problem& problem, const ScenarioTree& tree, const MixedPolicy& policy,
                const NatureStrategy& nature) {
    const auto reach = checked_reach(problem, tree, policy, &nature);
    ValueTable v = terminal_values(problem, tree);
    for (std::size_t t = problem.horizon(); t >= 1; --t) {
        const StageModel& sm = problem.stages[t - 1];
        for (const auto& n : tree.stage(t)) {
            for (std::size_t x = 0; x < sm.states; ++x) {
                if (!reach[n.id][x]) {
                    v[n.id][x] = kNaN;
                    continue;
                }
                const auto& mu = policy.control[n.id][x];
                const auto& p = nature[n.id][x];
                double s = 0.0;
                for (std::size_t u = 0; u < sm.controls; ++u) {
                    if (mu[u] <= 0.0) continue;
                    for (std::size_t a = 0; a < sm.atoms; ++a) {
                        if (p[a] <= 0.0) continue;
                        s += mu[u] * p[a] * (sm.stage_cost(x, u, a) + v[n.child(a)][sm.next_state(x, u, a)]);
                    }
                }
                v[n.id][x] = s;
            }
        }
    }
    return v.at(0, problem.initial_state);
}

} // namespace

EvaluationResult evaluate_policy_nested(const Problem& problem, const ScenarioTree& tree, const PurePolicy& policy) {
    require_shape(problem, tree, policy.control, "policy");
    if (auto gap = uncovered_pair(problem, tree, policy))
        throw InputError("policy has no control at " + describe(problem, tree, *gap));

    std::vector<AmbiguitySet> storage;
    const auto sets = node_sets(problem, tree, storage);
    EvaluationResult r;
    r.conditional = terminal_values(problem, tree);
    for (std::size_t t = problem.horizon(); t >= 1; --t) {
        const StageModel& sm = problem.stages[t - 1];
        const auto nodes = tree.stage(t);
        detail::parallel_for(nodes.size() * sm.states, 0, [&](std::size_t i) {
            const HistoryNode& n = nodes[i / sm.states];
            const std::size_t x = i % sm.states;
            const int u = policy.control[n.id][x];
            double& out = r.conditional[n.id][x];
            if (u < 0 || static_cast<std::size_t>(u) >= sm.controls) {
                out = kNaN;
                return;
            }
            std::vector<double> z(sm.atoms);
            for (std::size_t a = 0; a < sm.atoms; ++a) {
                const auto uu = static_cast<std::size_t>(u);
                z[a] = sm.stage_cost(x, uu, a) + r.conditional[n.child(a)][sm.next_state(x, uu, a)];
                if (std::isnan(z[a])) {
                    out = kNaN;
                    return;
                }
            }
            out = sets[n.id]->worst_case(z).value;
        });
    }
    r.nested_value = r.conditional.at(0, problem.initial_state);
    return r;
}

double evaluate_policy_static_worstcase(const Problem& problem, const ScenarioTree& tree, const PurePolicy& policy,
                                        std::size_t budget) {
    const auto* sw = std::get_if<StagewiseAmbiguity>(&problem.ambiguity);
    if (!sw) throw InputError("static evaluation requires stagewise ambiguity");
    const MixedPolicy mixed = as_mixed(problem, tree, policy);
    if (auto gap = uncovered_pair(problem, tree, policy))
        throw InputError("policy has no control at " + describe(problem, tree, *gap));

    const std::size_t T = problem.horizon();
    std::vector<std::vector<FiniteDistribution>> gens(T);
    std::size_t products = 1;
    for (std::size_t t = 0; t < T; ++t) {
        gens[t] = generating_measures(sw->stages[t]);
        if (gens[t].empty()) throw SolverError("stage " + std::to_string(t + 1) + " has no generating measures");
        if (products > budget / gens[t].size())
            throw InputError("static evaluation needs more than " + std::to_string(budget) + " vertex products");
        products *= gens[t].size();
    }

    std::vector<double> values(products);
    detail::parallel_for(products, 0, [&](std::size_t index) {
        std::vector<FiniteDistribution> per_node(tree.size());
        std::size_t rest = index;
        std::vector<std::size_t> pick(T);
        for (std::size_t t = T; t >= 1; --t) {
            pick[t - 1] = rest % gens[t - 1].size();
            rest /= gens[t - 1].size();
        }
        for (std::size_t t = 1; t <= T; ++t)
            for (const auto& n : tree.stage(t)) per_node[n.id] = gens[t - 1][pick[t - 1]];
        values[index] = expected(problem, tree, mixed, nature_per_node(problem, tree, per_node));
    });
    double best = -std::numeric_limits<double>::infinity();
    for (double v : values) best = std::max(best, v);
    return best;
}

NatureStrategy nature_per_node(const Problem& problem, const ScenarioTree& tree,
                               const std::vector<FiniteDistribution>& per_node) {
    if (per_node.size() != tree.size()) throw InputError("nature measures do not match the scenario tree");
    NatureStrategy out(tree, problem);
    for (std::size_t t = 1; t <= problem.horizon(); ++t)
        for (const auto& n : tree.stage(t))
            for (auto& cell : out[n.id]) cell = per_node[n.id];
    return out;
}

double expected_cost(const Problem& problem, const ScenarioTree& tree, const PurePolicy& policy,
                     const NatureStrategy& nature) {
    return expected(problem, tree, as_mixed(problem, tree, policy), nature);
}

double expected_cost(const Problem& problem, const ScenarioTree& tree, const MixedPolicy& policy,
                     const NatureStrategy& nature) {
    return expected(problem, tree, policy, nature);
}

RolloutStats monte_carlo_rollout(const Problem& problem, const ScenarioTree& tree, const PurePolicy& policy,
                                 const NatureStrategy& nature, const RolloutOptions& opts) {
    return rollout(problem, tree, as_mixed(problem, tree, policy), nature, opts);
}

RolloutStats monte_carlo_rollout(const Problem& problem, const ScenarioTree& tree, const MixedPolicy& policy,
                                 const NatureStrategy& nature, const RolloutOptions& opts) {
    return rollout(problem, tree, policy, nature, opts);
}

} // namespace drsoc
