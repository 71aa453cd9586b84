#pragma once

#include "drsoc/ambiguity.hpp"

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace drsoc {

/**
 * One stage of a tabular control problem. Tables are indexed by
 * (state, control, atom) in row-major order: next_state gives the state index
 * at the following stage, stage_cost the incurred cost.
 */
struct StageModel {
    std::size_t states = 0;
    std::size_t controls = 0;
    std::size_t atoms = 0;
    std::vector<int> next;
    std::vector<double> cost;

    /// Tables sized for (n, m, k), filled with state 0 and zero cost.
    static StageModel sized(std::size_t n, std::size_t m, std::size_t k);

    std::size_t index(std::size_t x, std::size_t u, std::size_t a) const { return (x * controls + u) * atoms + a; }
    std::size_t next_state(std::size_t x, std::size_t u, std::size_t a) const {
        return static_cast<std::size_t>(next[index(x, u, a)]);
    }
    double stage_cost(std::size_t x, std::size_t u, std::size_t a) const { return cost[index(x, u, a)]; }
    void set(std::size_t x, std::size_t u, std::size_t a, int to, double c) {
        next[index(x, u, a)] = to;
        cost[index(x, u, a)] = c;
    }
};

/// Finite-horizon problem. Stage t (1-based) is stages[t-1]; the states after
/// the last stage are those indexed by terminal_cost.
struct Problem {
    std::vector<StageModel> stages;
    std::vector<double> terminal_cost;
    std::size_t initial_state = 0;
    AmbiguityAssignment ambiguity;
    std::optional<ReferenceMeasure> reference;

    std::size_t horizon() const { return stages.size(); }
    /// State count at stage t in 1..T+1.
    std::size_t state_count(std::size_t t) const {
        return t <= stages.size() ? stages[t - 1].states : terminal_cost.size();
    }
    /// Ambiguity set at the node with the given history.
    const AmbiguitySpec& spec_at(const Path& path) const;
    bool stagewise() const { return std::holds_alternative<StagewiseAmbiguity>(ambiguity); }
};

struct Violation {
    std::string where;
    std::string message;
};

/// Every violated invariant, each naming the offending table cell or node.
/// Empty when the problem is consistent.
std::vector<Violation> validate_problem(const Problem& problem);

/// Throws InputError listing the violations when validate_problem is nonempty.
void require_valid(const Problem& problem);

} // namespace drsoc
