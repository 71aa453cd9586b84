#pragma once

#include "drsoc/ambiguity.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace drsoc {

/// Default threshold on pure - dual values for certifying a saddle point.
inline constexpr double kSaddleTol = 1e-7;

/// Payoff (cost to the controller) of control u against noise atom i.
class GameMatrix {
public:
    GameMatrix() = default;
    GameMatrix(std::size_t controls, std::size_t atoms) : rows_(controls), cols_(atoms), data_(controls * atoms, 0.0) {}
    GameMatrix(std::initializer_list<std::initializer_list<double>> rows);

    std::size_t controls() const { return rows_; }
    std::size_t atoms() const { return cols_; }
    double& operator()(std::size_t u, std::size_t i) { return data_[u * cols_ + i]; }
    double operator()(std::size_t u, std::size_t i) const { return data_[u * cols_ + i]; }
    std::span<const double> row(std::size_t u) const { return std::span<const double>(data_).subspan(u * cols_, cols_); }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

/// Controller commits to one control; nature answers with a worst case.
struct PureGameSolution {
    double value = 0.0;
    std::size_t control = 0;
    FiniteDistribution nature;
};

/// Nature commits to a measure; the controller answers with a pure control.
struct NatureGameSolution {
    double value = 0.0;
    FiniteDistribution nature;
    /// Best pure response to `nature`; for enumerated sets one entry per member.
    std::vector<std::size_t> responses;
};

/// Controller commits to a mixed control.
struct MixedGameSolution {
    double value = 0.0;
    FiniteDistribution controller;
    FiniteDistribution nature;
};

/// min over rows of the worst-case expectation of the row; lowest index on ties.
PureGameSolution controller_value_pure(const GameMatrix& m, const AmbiguitySet& set);
/// max over measures of min over rows; one epigraph LP (or member enumeration).
NatureGameSolution nature_value(const GameMatrix& m, const AmbiguitySet& set);
/// min over mixed controls of the worst case; one LP with the inner max dualized.
/// Nonconvex finite sets are replaced by their hull.
MixedGameSolution mixed_value(const GameMatrix& m, const AmbiguitySet& set);

PureGameSolution controller_value_pure(const GameMatrix& m, const AmbiguitySpec& spec);
NatureGameSolution nature_value(const GameMatrix& m, const AmbiguitySpec& spec);
MixedGameSolution mixed_value(const GameMatrix& m, const AmbiguitySpec& spec);

/// The three values of one node game and the saddle verdict.
struct NodeGameResult {
    double pure_value = 0.0;
    double mixed_value = 0.0;
    double dual_value = 0.0;
    std::size_t pure_control = 0;
    FiniteDistribution mixed_control;
    FiniteDistribution nature_pure;
    FiniteDistribution nature_mixed;
    FiniteDistribution nature_dual;
    double gap = 0.0;
    bool saddle = false;
};

NodeGameResult solve_node_game(const GameMatrix& m, const AmbiguitySet& set, double tol = kSaddleTol);

/// True iff pure_value - dual_value <= tol. Then (pure_control, nature_dual)
/// is an approximate saddle point.
bool saddle_check(const NodeGameResult& result, double tol = kSaddleTol);

} // namespace drsoc
