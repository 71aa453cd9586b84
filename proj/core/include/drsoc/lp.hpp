#pragma once

#include <cstddef>
#include <limits>
#include <vector>

namespace drsoc::lp {

inline constexpr double kInf = std::numeric_limits<double>::infinity();
inline constexpr std::size_t kIterationCap = 50000;

enum class Relation { LessEqual, Equal, GreaterEqual };
enum class Sense { Minimize, Maximize };
enum class Status { Optimal, Infeasible, Unbounded };

const char* to_string(Status s);

/// Dense LP: optimize objective·x subject to rows[i]·x (relation) rhs[i]
/// and lower <= x <= upper. Bounds may be infinite; everything else finite.
struct LinearProgram {
    Sense sense = Sense::Minimize;
    std::vector<double> objective;
    std::vector<std::vector<double>> rows;
    std::vector<double> rhs;
    std::vector<Relation> relations;
    std::vector<double> lower;
    std::vector<double> upper;

    std::size_t num_vars() const { return objective.size(); }
    std::size_t num_rows() const { return rows.size(); }

    /// Appends a column (existing rows get a zero coefficient). Returns its index.
    std::size_t add_variable(double cost, double lo = 0.0, double hi = kInf);
    /// Appends a row; coefficients shorter than num_vars() are zero-padded.
    std::size_t add_row(std::vector<double> coeffs, Relation rel, double rhs_value);
};

/**
 * Result of solve_lp.
 *
 * When optimal, duals and reduced_costs satisfy objective = Aᵀ·duals + reduced_costs
 * in the sense of the original program. For a minimization, duals are >= 0 on
 * >= rows and <= 0 on <= rows; reduced costs are >= 0 for variables at their
 * lower bound and <= 0 at their upper bound. A maximization flips all signs.
 * dual_value = rhs·duals + Σ reduced_cost·(active bound).
 */
struct LpSolution {
    Status status = Status::Infeasible;
    double value = 0.0;
    double dual_value = 0.0;
    std::vector<double> primal;
    std::vector<double> duals;
    std::vector<double> reduced_costs;
    std::size_t iterations = 0;

    bool optimal() const { return status == Status::Optimal; }
};

/// Two-phase primal simplex with Bland's rule. Deterministic for equal input.
/// Throws InputError on malformed data and SolverError past kIterationCap pivots.
LpSolution solve_lp(const LinearProgram& lp, double tol = 1e-9);

} // namespace drsoc::lp
