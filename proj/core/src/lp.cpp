#include "drsoc/lp.hpp"

#include "drsoc/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace drsoc::lp {

const char* to_string(Status s) {
    switch (s) {
    case Status::Optimal:
        return "optimal";
    case Status::Infeasible:
        return "infeasible";
    case Status::Unbounded:
        return "unbounded";
    }
    return "unknown";
}

std::size_t LinearProgram::add_variable(double cost, double lo, double hi) {
    objective.push_back(cost);
    lower.push_back(lo);
    upper.push_back(hi);
    for (auto& row : rows) {
        row.push_back(0.0);
    }
    return objective.size() - 1;
}

std::size_t LinearProgram::add_row(std::vector<double> coeffs, Relation rel, double rhs_value) {
    if (coeffs.size() > num_vars()) {
        throw InputError("add_row: more coefficients than variables");
    }
    coeffs.resize(num_vars(), 0.0);
    rows.push_back(std::move(coeffs));
    relations.push_back(rel);
    rhs.push_back(rhs_value);
    return rows.size() - 1;
}

namespace {

constexpr double kPivotEps = 1e-11;

// Original variable x = offset + sign * s_pos - s_neg, with s_* >= 0 standard columns.
struct VarMap {
    double offset = 0.0;
    double sign = 1.0;
    std::size_t pos = 0;
    std::ptrdiff_t neg = -1;
};

struct StdRow {
    std::vector<double> coeffs;
    Relation rel;
    double rhs;
    double flip = 1.0;
};

void check_input(const LinearProgram& lp) {
    const std::size_t n = lp.num_vars();
    if (lp.rhs.size() != lp.num_rows() || lp.relations.size() != lp.num_rows()) {
        throw InputError("LP: rhs/relations length does not match row count");
    }
    if ((!lp.lower.empty() && lp.lower.size() != n) || (!lp.upper.empty() && lp.upper.size() != n)) {
        throw InputError("LP: bound vectors do not match variable count");
    }
    for (double c : lp.objective) {
        if (!std::isfinite(c)) throw InputError("LP: non-finite objective coefficient");
    }
    for (std::size_t i = 0; i < lp.num_rows(); ++i) {
        if (lp.rows[i].size() != n) {
            throw InputError("LP: row " + std::to_string(i) + " has wrong length");
        }
        for (double a : lp.rows[i]) {
            if (!std::isfinite(a)) throw InputError("LP: non-finite constraint coefficient");
        }
        if (!std::isfinite(lp.rhs[i])) throw InputError("LP: non-finite right-hand side");
    }
    for (std::size_t j = 0; j < n; ++j) {
        const double lo = lp.lower.empty() ? 0.0 : lp.lower[j];
        const double hi = lp.upper.empty() ? kInf : lp.upper[j];
        if (std::isnan(lo) || std::isnan(hi) || lo == kInf || hi == -kInf) {
            throw InputError("LP: invalid bound on variable " + std::to_string(j));
        }
    }
}

class Tableau {
public:
    Tableau(std::size_t rows, std::size_t cols)
        : cols_(cols), a_(rows, std::vector<double>(cols + 1, 0.0)), basis_(rows), d_(cols + 1, 0.0) {}

    std::vector<double>& row(std::size_t r) { return a_[r]; }
    std::size_t& basic(std::size_t r) { return basis_[r]; }
    std::size_t basic(std::size_t r) const { return basis_[r]; }
    std::size_t rows() const { return a_.size(); }
    double rhs(std::size_t r) const { return a_[r][cols_]; }
    double reduced_cost(std::size_t c) const { return d_[c]; }
    double entry(std::size_t r, std::size_t c) const { return a_[r][c]; }

    void price(const std::vector<double>& cost) {
        for (std::size_t c = 0; c <= cols_; ++c) {
            double v = c < cols_ ? cost[c] : 0.0;
            for (std::size_t r = 0; r < rows(); ++r) {
                v -= cost[basis_[r]] * a_[r][c];
            }
            d_[c] = v;
        }
    }

    // Minimizes the priced cost with Bland's rule over columns flagged in `allowed`.
    Status optimize(const std::vector<bool>& allowed, double cost_scale, std::size_t& iterations) {
        const double eps_d = 1e-11 * (cost_scale > 0.0 ? cost_scale : 1.0);
        for (;;) {
            std::size_t enter = cols_;
            for (std::size_t c = 0; c < cols_; ++c) {
                if (allowed[c] && d_[c] < -eps_d) {
                    enter = c;
                    break;
                }
            }
            if (enter == cols_) {
                return Status::Optimal;
            }
            std::size_t leave = rows();
            double best = 0.0;
            for (std::size_t r = 0; r < rows(); ++r) {
                const double a = a_[r][enter];
                if (a <= kPivotEps) continue;
                const double ratio = std::max(0.0, a_[r][cols_]) / a;
                const double tie = 1e-12 * (1.0 + best);
                if (leave == rows() || ratio < best - tie) {
                    best = ratio;
                    leave = r;
                } else if (ratio <= best + tie && basis_[r] < basis_[leave]) {
                    best = std::min(best, ratio);
                    leave = r;
                }
            }
            if (leave == rows()) {
                return Status::Unbounded;
            }
            if (++iterations > kIterationCap) {
                throw SolverError("LP: iteration limit exceeded after " + std::to_string(kIterationCap) +
                                  " pivots");
            }
            pivot(leave, enter);
        }
    }

    void pivot(std::size_t r, std::size_t c) {
        auto& pr = a_[r];
        const double p = pr[c];
        for (double& v : pr) v /= p;
        pr[c] = 1.0;
        for (std::size_t i = 0; i < rows(); ++i) {
            if (i == r) continue;
            const double f = a_[i][c];
            if (f == 0.0) continue;
            auto& ri = a_[i];
            for (std::size_t k = 0; k <= cols_; ++k) ri[k] -= f * pr[k];
            ri[c] = 0.0;
        }
        const double f = d_[c];
        if (f != 0.0) {
            for (std::size_t k = 0; k <= cols_; ++k) d_[k] -= f * pr[k];
            d_[c] = 0.0;
        }
        basis_[r] = c;
    }

    double objective_value() const { return -d_[cols_]; }

private:
    std::size_t cols_;
    std::vector<std::vector<double>> a_;
    std::vector<std::size_t> basis_;
    std::vector<double> d_;
};

} // namespace

LpSolution solve_lp(const LinearProgram& lp, double tol) {
    if (!(tol > 0.0)) {
        throw InputError("LP: tolerance must be positive");
    }
    check_input(lp);
    const std::size_t n = lp.num_vars();
    const std::size_t m = lp.num_rows();
    const double kappa = lp.sense == Sense::Minimize ? 1.0 : -1.0;

    LpSolution sol;

    // Map original variables onto nonnegative standard columns.
    std::vector<VarMap> vmap(n);
    std::size_t nstd = 0;
    std::vector<std::pair<std::size_t, double>> bound_rows; // (std column, upper - lower)
    for (std::size_t j = 0; j < n; ++j) {
        const double lo = lp.lower.empty() ? 0.0 : lp.lower[j];
        const double hi = lp.upper.empty() ? kInf : lp.upper[j];
        if (lo > hi) {
            sol.status = Status::Infeasible;
            return sol;
        }
        VarMap& v = vmap[j];
        v.pos = nstd++;
        if (std::isfinite(lo)) {
            v.offset = lo;
            if (std::isfinite(hi)) bound_rows.emplace_back(v.pos, hi - lo);
        } else if (std::isfinite(hi)) {
            v.offset = hi;
            v.sign = -1.0;
        } else {
            v.neg = static_cast<std::ptrdiff_t>(nstd++);
        }
    }

    std::vector<StdRow> srows;
    srows.reserve(m + bound_rows.size());
    for (std::size_t i = 0; i < m; ++i) {
        StdRow r{std::vector<double>(nstd, 0.0), lp.relations[i], lp.rhs[i]};
        for (std::size_t j = 0; j < n; ++j) {
            const double a = lp.rows[i][j];
            if (a == 0.0) continue;
            r.rhs -= a * vmap[j].offset;
            r.coeffs[vmap[j].pos] += a * vmap[j].sign;
            if (vmap[j].neg >= 0) r.coeffs[static_cast<std::size_t>(vmap[j].neg)] -= a;
        }
        srows.push_back(std::move(r));
    }
    for (auto [col, width] : bound_rows) {
        StdRow r{std::vector<double>(nstd, 0.0), Relation::LessEqual, width};
        r.coeffs[col] = 1.0;
        srows.push_back(std::move(r));
    }
    double bmax = 0.0;
    for (auto& r : srows) {
        if (r.rhs < 0.0) {
            r.flip = -1.0;
            r.rhs = -r.rhs;
            for (double& a : r.coeffs) a = -a;
            if (r.rel == Relation::LessEqual) {
                r.rel = Relation::GreaterEqual;
            } else if (r.rel == Relation::GreaterEqual) {
                r.rel = Relation::LessEqual;
            }
        }
        bmax = std::max(bmax, r.rhs);
    }

    // Column layout: structural | slack/surplus | artificial. Each row owns a unit
    // column (slack or artificial) that forms the initial basis.
    const std::size_t R = srows.size();
    std::size_t nslack = 0;
    std::size_t nart = 0;
    for (const auto& r : srows) {
        if (r.rel != Relation::Equal) ++nslack;
        if (r.rel != Relation::LessEqual) ++nart;
    }
    const std::size_t cols = nstd + nslack + nart;
    Tableau tab(R, cols);
    std::vector<std::size_t> unit_col(R);
    std::vector<bool> is_art(cols, false);
    {
        std::size_t s = nstd;
        std::size_t a = nstd + nslack;
        for (std::size_t r = 0; r < R; ++r) {
            auto& row = tab.row(r);
            std::copy(srows[r].coeffs.begin(), srows[r].coeffs.end(), row.begin());
            row[cols] = srows[r].rhs;
            switch (srows[r].rel) {
            case Relation::LessEqual:
                row[s] = 1.0;
                unit_col[r] = s++;
                break;
            case Relation::GreaterEqual:
                row[s++] = -1.0;
                row[a] = 1.0;
                is_art[a] = true;
                unit_col[r] = a++;
                break;
            case Relation::Equal:
                row[a] = 1.0;
                is_art[a] = true;
                unit_col[r] = a++;
                break;
            }
            tab.basic(r) = unit_col[r];
        }
    }

    std::vector<bool> allowed(cols, true);
    if (nart > 0) {
        std::vector<double> phase1(cols, 0.0);
        for (std::size_t c = 0; c < cols; ++c) phase1[c] = is_art[c] ? 1.0 : 0.0;
        tab.price(phase1);
        tab.optimize(allowed, 1.0, sol.iterations);
        if (tab.objective_value() > tol * (1.0 + bmax)) {
            sol.status = Status::Infeasible;
            return sol;
        }
        // Drive zero-level artificials out of the basis where possible. Rows where
        // this fails are redundant; their artificial stays basic at zero.
        for (std::size_t r = 0; r < R; ++r) {
            if (!is_art[tab.basic(r)]) continue;
            for (std::size_t c = 0; c < cols; ++c) {
                if (!is_art[c] && std::abs(tab.entry(r, c)) > 1e-9) {
                    tab.pivot(r, c);
                    break;
                }
            }
        }
        for (std::size_t c = 0; c < cols; ++c) {
            if (is_art[c]) allowed[c] = false;
        }
    }

    std::vector<double> phase2(cols, 0.0);
    double cost_scale = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        const double c = kappa * lp.objective[j];
        phase2[vmap[j].pos] += c * vmap[j].sign;
        if (vmap[j].neg >= 0) phase2[static_cast<std::size_t>(vmap[j].neg)] -= c;
        cost_scale = std::max(cost_scale, std::abs(c));
    }
    tab.price(phase2);
    if (tab.optimize(allowed, cost_scale, sol.iterations) == Status::Unbounded) {
        sol.status = Status::Unbounded;
        return sol;
    }

    std::vector<double> s(cols, 0.0);
    for (std::size_t r = 0; r < R; ++r) s[tab.basic(r)] = std::max(0.0, tab.rhs(r));
    sol.primal.assign(n, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
        double x = vmap[j].offset + vmap[j].sign * s[vmap[j].pos];
        if (vmap[j].neg >= 0) x -= s[static_cast<std::size_t>(vmap[j].neg)];
        sol.primal[j] = x;
    }
    sol.value = 0.0;
    for (std::size_t j = 0; j < n; ++j) sol.value += lp.objective[j] * sol.primal[j];

    // Unit columns carry zero phase-2 cost, so their reduced cost is -y_r.
    sol.duals.assign(m, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
        sol.duals[i] = -kappa * srows[i].flip * tab.reduced_cost(unit_col[i]);
    }
    sol.reduced_costs.assign(n, 0.0);
    sol.dual_value = 0.0;
    for (std::size_t i = 0; i < m; ++i) sol.dual_value += lp.rhs[i] * sol.duals[i];
    for (std::size_t j = 0; j < n; ++j) {
        double d = lp.objective[j];
        for (std::size_t i = 0; i < m; ++i) d -= lp.rows[i][j] * sol.duals[i];
        sol.reduced_costs[j] = d;
        const double lo = lp.lower.empty() ? 0.0 : lp.lower[j];
        const double hi = lp.upper.empty() ? kInf : lp.upper[j];
        const bool at_lower = kappa * d > 0.0;
        const double bound = at_lower ? lo : hi;
        sol.dual_value += d * (std::isfinite(bound) ? bound : sol.primal[j]);
    }
    sol.status = Status::Optimal;
    return sol;
}

} // namespace drsoc::lp
