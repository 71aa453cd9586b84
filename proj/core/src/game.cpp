#include "drsoc/game.hpp"

#include "drsoc/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace drsoc {

GameMatrix::GameMatrix(std::initializer_list<std::initializer_list<double>> rows)
    : rows_(rows.size()), cols_(rows.size() ? rows.begin()->size() : 0) {
    for (const auto& r : rows) {
        if (r.size() != cols_) throw InputError("GameMatrix: ragged rows");
        data_.insert(data_.end(), r.begin(), r.end());
    }
}

namespace {

void check_game(const GameMatrix& m, const AmbiguitySet& set) {
    if (m.controls() == 0 || m.atoms() == 0) throw InputError("game matrix is empty");
    if (m.atoms() != set.dim()) {
        throw InputError("game matrix has " + std::to_string(m.atoms()) + " columns, ambiguity set has dimension " +
                         std::to_string(set.dim()));
    }
    for (std::size_t u = 0; u < m.controls(); ++u)
        for (double v : m.row(u))
            if (!std::isfinite(v)) throw InputError("game matrix has non-finite entries");
}

bool improves(double candidate, double best) { return candidate < best - 1e-12 * (1.0 + std::abs(best)); }

double row_value(const GameMatrix& m, std::size_t u, const FiniteDistribution& p) { return p.expectation(m.row(u)); }

std::size_t best_response(const GameMatrix& m, const FiniteDistribution& p) {
    std::size_t best = 0;
    double val = row_value(m, 0, p);
    for (std::size_t u = 1; u < m.controls(); ++u) {
        const double v = row_value(m, u, p);
        if (improves(v, val)) {
            val = v;
            best = u;
        }
    }
    return best;
}

void require_optimal(const lp::LpSolution& sol, const char* what) {
    if (!sol.optimal()) throw SolverError(std::string(what) + ": LP " + lp::to_string(sol.status));
}

} // namespace

PureGameSolution controller_value_pure(const GameMatrix& m, const AmbiguitySet& set) {
    check_game(m, set);
    PureGameSolution best;
    for (std::size_t u = 0; u < m.controls(); ++u) {
        WorstCase wc = set.worst_case(m.row(u));
        if (u == 0 || improves(wc.value, best.value)) best = {wc.value, u, std::move(wc.maximizer)};
    }
    return best;
}

NatureGameSolution nature_value(const GameMatrix& m, const AmbiguitySet& set) {
    check_game(m, set);
    NatureGameSolution out;
    if (set.enumerated()) {
        // the inner min over mixed controls is attained at a pure control
        out.value = -std::numeric_limits<double>::infinity();
        for (const auto& p : set.members()) {
            const std::size_t u = best_response(m, p);
            out.responses.push_back(u);
            const double v = row_value(m, u, p);
            if (v > out.value) {
                out.value = v;
                out.nature = p;
            }
        }
        return out;
    }
    // maximize v s.t. v <= (M p)_u for all u, p in the ambiguity set
    lp::LinearProgram prog;
    prog.sense = lp::Sense::Maximize;
    const std::size_t v = prog.add_variable(1.0, -lp::kInf, lp::kInf);
    const PolytopeVars vars = append_polytope(prog, set.hull());
    for (std::size_t u = 0; u < m.controls(); ++u) {
        std::vector<double> row(prog.num_vars(), 0.0);
        row[v] = 1.0;
        for (std::size_t i = 0; i < m.atoms(); ++i) row[vars.p_begin + i] = -m(u, i);
        prog.add_row(std::move(row), lp::Relation::LessEqual, 0.0);
    }
    const lp::LpSolution sol = lp::solve_lp(prog);
    require_optimal(sol, "nature_value");
    out.nature = clean_distribution(std::vector<double>(sol.primal.begin() + static_cast<std::ptrdiff_t>(vars.p_begin),
                                                        sol.primal.begin() + static_cast<std::ptrdiff_t>(vars.p_begin + set.dim())));
    const std::size_t u = best_response(m, out.nature);
    out.responses.push_back(u);
    out.value = row_value(m, u, out.nature);
    return out;
}

MixedGameSolution mixed_value(const GameMatrix& m, const AmbiguitySet& set) {
    check_game(m, set);
    const std::size_t nu = m.controls();
    const std::size_t k = set.dim();
    if (const auto* s = std::get_if<Singleton>(&set.spec())) {
        // fixed measure: the best pure row is optimal among mixtures
        const std::size_t u = best_response(m, s->dist);
        return {row_value(m, u, s->dist), FiniteDistribution::point_mass(nu, u), s->dist};
    }
    // Inner problem max_{x >= 0} (M^T mu; 0)·x s.t. E x = e, G x <= g has dual
    // min e·zeta + g·eta s.t. E^T zeta + G^T eta >= (M^T mu; 0), eta >= 0.
    // Minimizing over mu jointly gives one LP whose row duals on the p-columns
    // are nature's maximin measure.
    const LiftedPolytope& poly = set.hull();
    const std::size_t width = poly.width();
    lp::LinearProgram prog;
    const std::size_t mu0 = prog.num_vars();
    for (std::size_t u = 0; u < nu; ++u) prog.add_variable(0.0);
    const std::size_t simplex_dual = prog.add_variable(1.0, -lp::kInf, lp::kInf);
    const std::size_t eq0 = prog.num_vars();
    for (std::size_t r = 0; r < poly.eq.size(); ++r) prog.add_variable(poly.eq_rhs[r], -lp::kInf, lp::kInf);
    const std::size_t in0 = prog.num_vars();
    for (std::size_t r = 0; r < poly.ineq.size(); ++r) prog.add_variable(poly.ineq_rhs[r]);
    for (std::size_t j = 0; j < width; ++j) {
        std::vector<double> row(prog.num_vars(), 0.0);
        if (j < k) {
            row[simplex_dual] = 1.0;
            for (std::size_t u = 0; u < nu; ++u) row[mu0 + u] = -m(u, j);
        }
        for (std::size_t r = 0; r < poly.eq.size(); ++r) row[eq0 + r] = poly.eq[r][j];
        for (std::size_t r = 0; r < poly.ineq.size(); ++r) row[in0 + r] = poly.ineq[r][j];
        prog.add_row(std::move(row), lp::Relation::GreaterEqual, 0.0);
    }
    std::vector<double> sum(prog.num_vars(), 0.0);
    for (std::size_t u = 0; u < nu; ++u) sum[mu0 + u] = 1.0;
    prog.add_row(std::move(sum), lp::Relation::Equal, 1.0);

    const lp::LpSolution sol = lp::solve_lp(prog);
    require_optimal(sol, "mixed_value");
    MixedGameSolution out;
    out.value = sol.value;
    out.controller = clean_distribution(std::vector<double>(sol.primal.begin() + static_cast<std::ptrdiff_t>(mu0),
                                                            sol.primal.begin() + static_cast<std::ptrdiff_t>(mu0 + nu)));
    out.nature = clean_distribution(std::vector<double>(sol.duals.begin(), sol.duals.begin() + static_cast<std::ptrdiff_t>(k)));
    return out;
}

PureGameSolution controller_value_pure(const GameMatrix& m, const AmbiguitySpec& spec) {
    return controller_value_pure(m, AmbiguitySet(spec));
}
NatureGameSolution nature_value(const GameMatrix& m, const AmbiguitySpec& spec) { return nature_value(m, AmbiguitySet(spec)); }
MixedGameSolution mixed_value(const GameMatrix& m, const AmbiguitySpec& spec) { return mixed_value(m, AmbiguitySet(spec)); }

NodeGameResult solve_node_game(const GameMatrix& m, const AmbiguitySet& set, double tol) {
    NodeGameResult r;
    auto pure = controller_value_pure(m, set);
    auto mixed = mixed_value(m, set);
    auto dual = nature_value(m, set);
    r.pure_value = pure.value;
    r.pure_control = pure.control;
    r.nature_pure = std::move(pure.nature);
    r.mixed_value = mixed.value;
    r.mixed_control = std::move(mixed.controller);
    r.nature_mixed = std::move(mixed.nature);
    r.dual_value = dual.value;
    r.nature_dual = std::move(dual.nature);
    r.gap = std::max(0.0, r.pure_value - r.dual_value);
    r.saddle = saddle_check(r, tol);
    return r;
}

bool saddle_check(const NodeGameResult& result, double tol) { return result.pure_value - result.dual_value <= tol; }

} // namespace drsoc
