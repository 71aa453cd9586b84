#include "drsoc/ambiguity.hpp"

#include "drsoc/errors.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <sstream>

namespace drsoc {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

bool all_finite(std::span<const double> v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

std::optional<std::string> validate_metric(const DenseMatrix& d, std::size_t k) {
    if (d.size() != k) return "metric must be " + std::to_string(k) + "x" + std::to_string(k);
    for (std::size_t i = 0; i < k; ++i) {
        if (d[i].size() != k) return "metric row " + std::to_string(i) + " has wrong length";
        if (!all_finite(d[i])) return "metric has non-finite entries";
    }
    for (std::size_t i = 0; i < k; ++i) {
        if (d[i][i] != 0.0) return "metric diagonal must be zero";
        for (std::size_t j = 0; j < k; ++j) {
            if (d[i][j] < 0.0) return "metric entries must be nonnegative";
            if (d[i][j] != d[j][i]) return "metric must be symmetric";
        }
    }
    return std::nullopt;
}

bool satisfies_triangle_inequality(const DenseMatrix& d) {
    const std::size_t k = d.size();
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = 0; j < k; ++j)
            for (std::size_t l = 0; l < k; ++l)
                if (d[i][j] > d[i][l] + d[l][j] + 1e-12) return false;
    return true;
}

struct Halfspace {
    std::vector<double> a;
    double b;
};

double eval(const Halfspace& h, const std::vector<double>& p) {
    double s = -h.b;
    for (std::size_t i = 0; i < p.size(); ++i) s += h.a[i] * p[i];
    return s;
}

double scale_of(const Halfspace& h) {
    double s = 1.0 + std::abs(h.b);
    for (double x : h.a) s += std::abs(x);
    return s;
}

using Bits = std::vector<std::uint64_t>;

bool subset_of(const Bits& a, const Bits& b) {
    for (std::size_t w = 0; w < a.size(); ++w)
        if (a[w] & ~b[w]) return false;
    return true;
}

// Double description over the probability simplex: start from its unit-vector
// vertices and cut with one halfspace at a time. Adjacency is decided
// combinatorially: u, v span an edge iff no third vertex is tight on every
// constraint that both are tight on.
std::vector<std::vector<double>> simplex_cut_vertices(std::size_t k, const std::vector<Halfspace>& cuts) {
    std::vector<Halfspace> cons;
    for (std::size_t i = 0; i < k; ++i) {
        Halfspace h{std::vector<double>(k, 0.0), 0.0};
        h.a[i] = -1.0;
        cons.push_back(std::move(h));
    }
    std::vector<std::vector<double>> verts;
    for (std::size_t i = 0; i < k; ++i) {
        std::vector<double> e(k, 0.0);
        e[i] = 1.0;
        verts.push_back(std::move(e));
    }

    auto tight_sets = [&](const std::vector<std::vector<double>>& vs) {
        const std::size_t words = (cons.size() + 63) / 64;
        std::vector<Bits> t(vs.size(), Bits(words, 0));
        for (std::size_t v = 0; v < vs.size(); ++v)
            for (std::size_t c = 0; c < cons.size(); ++c)
                if (std::abs(eval(cons[c], vs[v])) <= 1e-9 * scale_of(cons[c])) t[v][c / 64] |= std::uint64_t{1} << (c % 64);
        return t;
    };

    for (const Halfspace& cut : cuts) {
        const double eps = 1e-10 * scale_of(cut);
        std::vector<double> s(verts.size());
        bool any_out = false;
        for (std::size_t v = 0; v < verts.size(); ++v) {
            s[v] = eval(cut, verts[v]);
            any_out = any_out || s[v] > eps;
        }
        if (!any_out) {
            cons.push_back(cut);
            continue;
        }
        const auto tight = tight_sets(verts);
        std::vector<std::vector<double>> next;
        for (std::size_t v = 0; v < verts.size(); ++v)
            if (s[v] <= eps) next.push_back(verts[v]);
        for (std::size_t u = 0; u < verts.size(); ++u) {
            if (s[u] <= eps) continue;
            for (std::size_t v = 0; v < verts.size(); ++v) {
                if (s[v] >= -eps) continue;
                Bits common(tight[u].size());
                for (std::size_t w = 0; w < common.size(); ++w) common[w] = tight[u][w] & tight[v][w];
                bool edge = true;
                for (std::size_t w = 0; w < verts.size() && edge; ++w)
                    if (w != u && w != v && subset_of(common, tight[w])) edge = false;
                if (!edge) continue;
                const double t = s[u] / (s[u] - s[v]);
                std::vector<double> x(k);
                for (std::size_t i = 0; i < k; ++i) x[i] = verts[u][i] + t * (verts[v][i] - verts[u][i]);
                next.push_back(std::move(x));
            }
        }
        std::vector<std::vector<double>> dedup;
        for (auto& x : next) {
            bool dup = false;
            for (const auto& y : dedup) {
                double d = 0.0;
                for (std::size_t i = 0; i < k; ++i) d = std::max(d, std::abs(x[i] - y[i]));
                if (d <= 1e-9) {
                    dup = true;
                    break;
                }
            }
            if (!dup) dedup.push_back(std::move(x));
        }
        verts = std::move(dedup);
        cons.push_back(cut);
        if (verts.empty()) break;
    }
    return verts;
}

std::vector<Halfspace> halfspaces_of(const LiftedPolytope& poly) {
    std::vector<Halfspace> hs;
    for (std::size_t r = 0; r < poly.ineq.size(); ++r) hs.push_back({poly.ineq[r], poly.ineq_rhs[r]});
    for (std::size_t r = 0; r < poly.eq.size(); ++r) {
        hs.push_back({poly.eq[r], poly.eq_rhs[r]});
        std::vector<double> neg(poly.eq[r]);
        for (double& x : neg) x = -x;
        hs.push_back({std::move(neg), -poly.eq_rhs[r]});
    }
    return hs;
}

// Decodes a Prüfer sequence over {0..k-1} into the k-1 edges of a labelled tree.
std::vector<std::pair<std::size_t, std::size_t>> prufer_edges(const std::vector<std::size_t>& seq, std::size_t k) {
    std::vector<std::size_t> degree(k, 1);
    for (std::size_t x : seq) ++degree[x];
    std::vector<std::pair<std::size_t, std::size_t>> edges;
    for (std::size_t x : seq) {
        for (std::size_t leaf = 0; leaf < k; ++leaf) {
            if (degree[leaf] == 1) {
                edges.emplace_back(leaf, x);
                --degree[leaf];
                --degree[x];
                break;
            }
        }
    }
    std::size_t a = k, b = k;
    for (std::size_t v = 0; v < k; ++v) {
        if (degree[v] == 1) (a == k ? a : b) = v;
    }
    edges.emplace_back(a, b);
    return edges;
}

// Vertices of {phi : phi_i - phi_j <= d_ij, phi_0 = 0}. Each vertex has a
// spanning tree of tight, oriented edges, so trees x orientations cover them.
std::vector<std::vector<double>> lipschitz_vertices(const DenseMatrix& d) {
    const std::size_t k = d.size();
    std::vector<std::vector<double>> out;
    if (k == 1) {
        out.push_back({0.0});
        return out;
    }
    std::vector<std::size_t> seq(k - 2, 0);
    for (;;) {
        const auto edges = prufer_edges(seq, k);
        for (std::uint32_t mask = 0; mask < (std::uint32_t{1} << (k - 1)); ++mask) {
            // edge e oriented so that phi_from - phi_to = d
            std::vector<std::vector<std::pair<std::size_t, double>>> adj(k);
            for (std::size_t e = 0; e < edges.size(); ++e) {
                auto [a, b] = edges[e];
                if (mask >> e & 1U) std::swap(a, b);
                adj[a].emplace_back(b, -d[a][b]); // phi_b = phi_a - d
                adj[b].emplace_back(a, d[a][b]);  // phi_a = phi_b + d
            }
            std::vector<double> phi(k, 0.0);
            std::vector<bool> seen(k, false);
            std::vector<std::size_t> stack{0};
            seen[0] = true;
            while (!stack.empty()) {
                const std::size_t v = stack.back();
                stack.pop_back();
                for (auto [w, delta] : adj[v]) {
                    if (seen[w]) continue;
                    seen[w] = true;
                    phi[w] = phi[v] + delta;
                    stack.push_back(w);
                }
            }
            bool feasible = true;
            for (std::size_t i = 0; i < k && feasible; ++i)
                for (std::size_t j = 0; j < k && feasible; ++j)
                    if (phi[i] - phi[j] > d[i][j] + 1e-12) feasible = false;
            if (!feasible) continue;
            bool dup = false;
            for (const auto& other : out) {
                double diff = 0.0;
                for (std::size_t i = 0; i < k; ++i) diff = std::max(diff, std::abs(other[i] - phi[i]));
                if (diff <= 1e-12) {
                    dup = true;
                    break;
                }
            }
            if (!dup) out.push_back(std::move(phi));
        }
        std::size_t pos = seq.size();
        while (pos > 0 && seq[pos - 1] == k - 1) seq[--pos] = 0;
        if (pos == 0) break;
        ++seq[pos - 1];
    }
    return out;
}

std::vector<FiniteDistribution> to_distributions(const std::vector<std::vector<double>>& verts) {
    std::vector<FiniteDistribution> out;
    out.reserve(verts.size());
    for (auto v : verts) {
        for (double& x : v) x = std::max(0.0, x);
        out.emplace_back(std::move(v));
    }
    return out;
}

void check_point(std::span<const double> z, std::size_t k, const char* what) {
    if (z.size() != k) {
        std::ostringstream os;
        os << what << ": dimension mismatch (" << z.size() << " values for " << k << " atoms)";
        throw InputError(os.str());
    }
    if (!all_finite(z)) throw InputError(std::string(what) + ": non-finite value");
}

} // namespace

PolytopeH PolytopeH::make(std::size_t dim, DenseMatrix G, std::vector<double> h) {
    PolytopeH p{dim, std::move(G), std::move(h)};
    if (auto v = validate_spec(AmbiguitySpec{p})) throw InputError(*v);
    return p;
}

const char* spec_type_name(const AmbiguitySpec& spec) {
    return std::visit(overloaded{[](const Singleton&) { return "singleton"; },
                                 [](const FiniteSet&) { return "finite_set"; },
                                 [](const CvarBall&) { return "cvar"; },
                                 [](const WassersteinBall&) { return "wasserstein"; },
                                 [](const PolytopeH&) { return "polytope"; }},
                      spec);
}

std::size_t dimension(const AmbiguitySpec& spec) {
    return std::visit(overloaded{[](const Singleton& s) { return s.dist.size(); },
                                 [](const FiniteSet& s) { return s.members.empty() ? 0 : s.members[0].size(); },
                                 [](const CvarBall& s) { return s.reference.size(); },
                                 [](const WassersteinBall& s) { return s.reference.size(); },
                                 [](const PolytopeH& s) { return s.dim; }},
                      spec);
}

bool is_convex(const AmbiguitySpec& spec) {
    if (const auto* fs = std::get_if<FiniteSet>(&spec)) return fs->convexify || fs->members.size() <= 1;
    return true;
}

std::optional<std::string> validate_spec(const AmbiguitySpec& spec) {
    return std::visit(
        overloaded{
            [](const Singleton& s) -> std::optional<std::string> { return s.dist.validate(); },
            [](const FiniteSet& s) -> std::optional<std::string> {
                if (s.members.empty()) return "finite set has no members";
                for (std::size_t i = 0; i < s.members.size(); ++i) {
                    if (auto v = s.members[i].validate()) return "member " + std::to_string(i) + ": " + *v;
                    if (s.members[i].size() != s.members[0].size()) return "members differ in dimension";
                }
                return std::nullopt;
            },
            [](const CvarBall& s) -> std::optional<std::string> {
                if (auto v = s.reference.validate()) return "reference: " + *v;
                if (!(s.alpha >= 0.0 && s.alpha < 1.0)) return "alpha must lie in [0, 1)";
                return std::nullopt;
            },
            [](const WassersteinBall& s) -> std::optional<std::string> {
                if (auto v = s.reference.validate()) return "reference: " + *v;
                if (!(s.radius >= 0.0) || !std::isfinite(s.radius)) return "radius must be finite and >= 0";
                return validate_metric(s.metric, s.reference.size());
            },
            [](const PolytopeH& s) -> std::optional<std::string> {
                if (s.dim == 0) return "polytope dimension must be positive";
                if (s.G.size() != s.h.size()) return "polytope G and h disagree in row count";
                for (const auto& row : s.G) {
                    if (row.size() != s.dim) return "polytope row has wrong length";
                    if (!all_finite(row)) return "polytope has non-finite coefficients";
                }
                if (!all_finite(s.h)) return "polytope has non-finite right-hand side";
                lp::LinearProgram lp;
                append_polytope(lp, LiftedPolytope{s.dim, 0, s.G, s.h, {}, {}});
                if (lp::solve_lp(lp).status != lp::Status::Optimal) return "polytope is empty";
                return std::nullopt;
            }},
        spec);
}

std::optional<FiniteDistribution> conditional_reference(const ReferenceMeasure& ref, const Path& path) {
    return std::visit(
        overloaded{
            [&](const StagewiseReference& r) -> std::optional<FiniteDistribution> {
                if (path.size() >= r.stages.size()) throw InputError("reference has no stage for node " + path_key(path));
                return r.stages[path.size()];
            },
            [&](const JointReference& r) -> std::optional<FiniteDistribution> {
                auto it = r.masses.find(path);
                if (it == r.masses.end()) return std::nullopt;
                const double total = std::accumulate(it->second.begin(), it->second.end(), 0.0);
                if (!(total > 0.0)) return std::nullopt;
                std::vector<double> w(it->second);
                for (double& x : w) x /= total;
                return FiniteDistribution(std::move(w));
            }},
        ref);
}

LiftedPolytope to_polytope(const AmbiguitySpec& spec, std::size_t k) {
    if (dimension(spec) != k) {
        throw InputError("to_polytope: spec dimension " + std::to_string(dimension(spec)) + " does not match " +
                         std::to_string(k));
    }
    LiftedPolytope poly;
    poly.dim = k;
    std::visit(overloaded{
                   [&](const Singleton& s) {
                       for (std::size_t i = 0; i < k; ++i) {
                           std::vector<double> row(k, 0.0);
                           row[i] = 1.0;
                           poly.eq.push_back(std::move(row));
                           poly.eq_rhs.push_back(s.dist[i]);
                       }
                   },
                   [&](const FiniteSet& s) {
                       if (!s.convexify && s.members.size() > 1) {
                           throw InputError("nonconvex set has no H-representation");
                       }
                       // p = sum_s lambda_s * member_s, lambda >= 0
                       poly.aux = s.members.size();
                       for (std::size_t i = 0; i < k; ++i) {
                           std::vector<double> row(poly.width(), 0.0);
                           row[i] = 1.0;
                           for (std::size_t m = 0; m < s.members.size(); ++m) row[k + m] = -s.members[m][i];
                           poly.eq.push_back(std::move(row));
                           poly.eq_rhs.push_back(0.0);
                       }
                   },
                   [&](const CvarBall& s) {
                       const double cap = 1.0 / (1.0 - s.alpha);
                       for (std::size_t i = 0; i < k; ++i) {
                           std::vector<double> row(k, 0.0);
                           row[i] = 1.0;
                           poly.ineq.push_back(std::move(row));
                           poly.ineq_rhs.push_back(s.reference[i] * cap);
                       }
                   },
                   [&](const WassersteinBall& s) {
                       // coupling pi_ij at aux index i*k + j: row sums match the
                       // reference, column sums match p, transport cost <= radius
                       poly.aux = k * k;
                       for (std::size_t i = 0; i < k; ++i) {
                           std::vector<double> row(poly.width(), 0.0);
                           for (std::size_t j = 0; j < k; ++j) row[k + i * k + j] = 1.0;
                           poly.eq.push_back(std::move(row));
                           poly.eq_rhs.push_back(s.reference[i]);
                       }
                       for (std::size_t j = 0; j < k; ++j) {
                           std::vector<double> row(poly.width(), 0.0);
                           row[j] = 1.0;
                           for (std::size_t i = 0; i < k; ++i) row[k + i * k + j] = -1.0;
                           poly.eq.push_back(std::move(row));
                           poly.eq_rhs.push_back(0.0);
                       }
                       std::vector<double> cost(poly.width(), 0.0);
                       for (std::size_t i = 0; i < k; ++i)
                           for (std::size_t j = 0; j < k; ++j) cost[k + i * k + j] = s.metric[i][j];
                       poly.ineq.push_back(std::move(cost));
                       poly.ineq_rhs.push_back(s.radius);
                   },
                   [&](const PolytopeH& s) {
                       poly.ineq = s.G;
                       poly.ineq_rhs = s.h;
                   }},
               spec);
    lp::LinearProgram feas;
    append_polytope(feas, poly);
    if (lp::solve_lp(feas).status != lp::Status::Optimal) throw InputError("ambiguity set is empty");
    return poly;
}

PolytopeVars append_polytope(lp::LinearProgram& lp, const LiftedPolytope& poly) {
    PolytopeVars vars;
    vars.p_begin = lp.num_vars();
    for (std::size_t i = 0; i < poly.dim; ++i) lp.add_variable(0.0);
    vars.aux_begin = lp.num_vars();
    for (std::size_t i = 0; i < poly.aux; ++i) lp.add_variable(0.0);

    auto place = [&](const std::vector<double>& coeffs) {
        std::vector<double> row(lp.num_vars(), 0.0);
        for (std::size_t j = 0; j < poly.dim; ++j) row[vars.p_begin + j] = coeffs[j];
        for (std::size_t j = 0; j < poly.aux; ++j) row[vars.aux_begin + j] = coeffs[poly.dim + j];
        return row;
    };
    std::vector<double> ones(poly.width(), 0.0);
    std::fill(ones.begin(), ones.begin() + static_cast<std::ptrdiff_t>(poly.dim), 1.0);
    lp.add_row(place(ones), lp::Relation::Equal, 1.0);
    for (std::size_t r = 0; r < poly.eq.size(); ++r) lp.add_row(place(poly.eq[r]), lp::Relation::Equal, poly.eq_rhs[r]);
    for (std::size_t r = 0; r < poly.ineq.size(); ++r)
        lp.add_row(place(poly.ineq[r]), lp::Relation::LessEqual, poly.ineq_rhs[r]);
    return vars;
}

FiniteDistribution clean_distribution(std::vector<double> p) {
    // vertex maximizers (point masses in particular) then reproduce z exactly
    for (double& x : p) {
        if (x < 1e-13) x = 0.0;
        if (std::abs(x - 1.0) < 1e-13) x = 1.0;
    }
    return FiniteDistribution(std::move(p));
}

AmbiguitySet::AmbiguitySet(AmbiguitySpec spec) : spec_(std::move(spec)), dim_(dimension(spec_)) {
    if (const auto* s = std::get_if<Singleton>(&spec_)) {
        members_ = {s->dist};
    } else if (const auto* fs = std::get_if<FiniteSet>(&spec_); fs && !fs->convexify) {
        members_ = fs->members;
    }
    if (const auto* fs = std::get_if<FiniteSet>(&spec_)) {
        FiniteSet hull = *fs;
        hull.convexify = true;
        hull_ = to_polytope(hull, dim_);
    } else {
        hull_ = to_polytope(spec_, dim_);
    }
}

WorstCase AmbiguitySet::worst_case(std::span<const double> z) const {
    check_point(z, dim_, "worst_case_expectation");
    if (enumerated()) {
        WorstCase best{-lp::kInf, {}};
        for (const auto& m : members_) {
            const double v = m.expectation(z);
            if (v > best.value) best = {v, m};
        }
        return best;
    }
    lp::LinearProgram prog;
    prog.sense = lp::Sense::Maximize;
    const PolytopeVars vars = append_polytope(prog, hull_);
    for (std::size_t i = 0; i < dim_; ++i) prog.objective[vars.p_begin + i] = z[i];
    const lp::LpSolution sol = lp::solve_lp(prog);
    if (!sol.optimal()) {
        throw SolverError(std::string("worst_case_expectation: LP ") + lp::to_string(sol.status));
    }
    auto maximizer = clean_distribution(std::vector<double>(sol.primal.begin() + static_cast<std::ptrdiff_t>(vars.p_begin),
                                                            sol.primal.begin() + static_cast<std::ptrdiff_t>(vars.p_begin + dim_)));
    return {maximizer.expectation(z), std::move(maximizer)};
}

WorstCase worst_case_expectation(const AmbiguitySpec& spec, std::span<const double> z) {
    check_point(z, dimension(spec), "worst_case_expectation");
    return AmbiguitySet(spec).worst_case(z);
}

double cvar_closed_form(std::span<const double> z, const FiniteDistribution& q, double alpha) {
    if (!(alpha >= 0.0 && alpha < 1.0)) throw InputError("cvar_closed_form: alpha must lie in [0, 1)");
    if (auto v = q.validate()) throw InputError("cvar_closed_form: " + *v);
    check_point(z, q.size(), "cvar_closed_form");
    std::vector<std::size_t> order(z.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return z[a] > z[b]; });
    // upper tail of mass 1 - alpha; the last atom entered sits at the V@R level
    double remaining = 1.0 - alpha;
    double acc = 0.0;
    for (std::size_t i : order) {
        if (remaining <= 0.0) break;
        const double take = std::min(q[i], remaining);
        acc += take * z[i];
        remaining -= take;
    }
    return acc / (1.0 - alpha);
}

std::vector<FiniteDistribution> vertex_enumerate(const LiftedPolytope& poly) {
    if (poly.dim > kEnumerationGuard) {
        throw InputError("enumeration guard: dimension " + std::to_string(poly.dim) + " exceeds " +
                         std::to_string(kEnumerationGuard));
    }
    if (poly.aux != 0) throw InputError("vertex_enumerate: lifted polytopes are not supported");
    auto verts = simplex_cut_vertices(poly.dim, halfspaces_of(poly));
    if (verts.empty()) throw InputError("vertex_enumerate: polytope is empty");
    return to_distributions(verts);
}

std::vector<FiniteDistribution> vertex_enumerate(const PolytopeH& poly) {
    return vertex_enumerate(LiftedPolytope{poly.dim, 0, poly.G, poly.h, {}, {}});
}

std::vector<FiniteDistribution> generating_measures(const AmbiguitySpec& spec) {
    if (const auto* s = std::get_if<Singleton>(&spec)) return {s->dist};
    if (const auto* fs = std::get_if<FiniteSet>(&spec)) {
        std::vector<FiniteDistribution> out;
        for (const auto& m : fs->members)
            if (std::find(out.begin(), out.end(), m) == out.end()) out.push_back(m);
        return out;
    }
    if (const auto* w = std::get_if<WassersteinBall>(&spec)) {
        const std::size_t k = w->reference.size();
        if (k > kEnumerationGuard) {
            throw InputError("enumeration guard: dimension " + std::to_string(k) + " exceeds " +
                             std::to_string(kEnumerationGuard));
        }
        if (!satisfies_triangle_inequality(w->metric)) {
            throw InputError("vertex enumeration of a Wasserstein ball needs a metric ground cost");
        }
        // Kantorovich-Rubinstein: W(p, q) <= r iff phi.(p - q) <= r for every
        // extreme 1-Lipschitz potential phi.
        std::vector<Halfspace> cuts;
        for (const auto& phi : lipschitz_vertices(w->metric)) {
            double rhs = w->radius;
            for (std::size_t i = 0; i < k; ++i) rhs += phi[i] * w->reference[i];
            cuts.push_back({phi, rhs});
        }
        auto verts = simplex_cut_vertices(k, cuts);
        if (verts.empty()) throw InputError("vertex_enumerate: polytope is empty");
        return to_distributions(verts);
    }
    return vertex_enumerate(to_polytope(spec, dimension(spec)));
}

} // namespace drsoc
