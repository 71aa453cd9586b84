#include "drsoc/problem.hpp"

#include "drsoc/errors.hpp"

#include <cmath>
#include <set>
#include <sstream>

namespace drsoc {

StageModel StageModel::sized(std::size_t n, std::size_t m, std::size_t k) {
    StageModel s;
    s.states = n;
    s.controls = m;
    s.atoms = k;
    s.next.assign(n * m * k, 0);
    s.cost.assign(n * m * k, 0.0);
    return s;
}

const AmbiguitySpec& Problem::spec_at(const Path& path) const {
    if (const auto* sw = std::get_if<StagewiseAmbiguity>(&ambiguity)) {
        if (path.size() >= sw->stages.size()) throw InputError("no ambiguity set for stage " + std::to_string(path.size() + 1));
        return sw->stages[path.size()];
    }
    const auto& nodes = std::get<PerNodeAmbiguity>(ambiguity).nodes;
    auto it = nodes.find(path);
    if (it == nodes.end()) throw InputError("no ambiguity set for node \"" + path_key(path) + "\"");
    return it->second;
}

namespace {

std::string stage_name(std::size_t t) { return "stage " + std::to_string(t); }

bool valid_path(const Problem& p, const Path& path) {
    if (path.size() >= p.horizon()) return false;
    for (std::size_t s = 0; s < path.size(); ++s) {
        if (path[s] < 0 || static_cast<std::size_t>(path[s]) >= p.stages[s].atoms) return false;
    }
    return true;
}

void check_spec(std::vector<Violation>& out, const std::string& where, const AmbiguitySpec& spec, std::size_t k) {
    if (dimension(spec) != k) {
        out.push_back({where, std::string(spec_type_name(spec)) + " set has dimension " + std::to_string(dimension(spec)) +
                                  ", stage has " + std::to_string(k) + " atoms"});
        return;
    }
    if (auto v = validate_spec(spec)) out.push_back({where, *v});
}

} // namespace

std::vector<Violation> validate_problem(const Problem& p) {
    std::vector<Violation> out;
    const std::size_t T = p.horizon();
    if (T == 0) {
        out.push_back({"problem", "horizon must be at least 1"});
        return out;
    }
    if (p.terminal_cost.empty()) out.push_back({"terminal_cost", "must list at least one state"});
    for (std::size_t x = 0; x < p.terminal_cost.size(); ++x) {
        if (!std::isfinite(p.terminal_cost[x])) out.push_back({"terminal_cost[" + std::to_string(x) + "]", "not finite"});
    }
    bool tables_ok = true;
    for (std::size_t t = 1; t <= T; ++t) {
        const StageModel& s = p.stages[t - 1];
        if (s.states == 0 || s.controls == 0 || s.atoms == 0) {
            out.push_back({stage_name(t), "states, controls and atoms must be positive"});
            tables_ok = false;
            continue;
        }
        const std::size_t cells = s.states * s.controls * s.atoms;
        if (s.next.size() != cells || s.cost.size() != cells) {
            out.push_back({stage_name(t), "next/cost tables must have states*controls*atoms entries"});
            tables_ok = false;
            continue;
        }
        const std::size_t n_next = p.state_count(t + 1);
        for (std::size_t x = 0; x < s.states; ++x)
            for (std::size_t u = 0; u < s.controls; ++u)
                for (std::size_t a = 0; a < s.atoms; ++a) {
                    std::ostringstream where;
                    where << "(t=" << t << ", state=" << x << ", control=" << u << ", atom=" << a << ")";
                    const int to = s.next[s.index(x, u, a)];
                    if (to < 0 || static_cast<std::size_t>(to) >= n_next) {
                        out.push_back({where.str(), "next state " + std::to_string(to) + " outside 0.." +
                                                        std::to_string(static_cast<long long>(n_next) - 1)});
                    }
                    if (!std::isfinite(s.cost[s.index(x, u, a)])) out.push_back({where.str(), "cost is not finite"});
                }
    }
    if (tables_ok && p.initial_state >= p.stages[0].states) {
        out.push_back({"initial_state", "index " + std::to_string(p.initial_state) + " outside stage 1 states"});
    }
    if (!tables_ok) return out;

    if (const auto* sw = std::get_if<StagewiseAmbiguity>(&p.ambiguity)) {
        if (sw->stages.size() != T) {
            out.push_back({"ambiguity", "stagewise list has " + std::to_string(sw->stages.size()) + " entries, horizon is " +
                                            std::to_string(T)});
        } else {
            for (std::size_t t = 1; t <= T; ++t) check_spec(out, "ambiguity " + stage_name(t), sw->stages[t - 1], p.stages[t - 1].atoms);
        }
    } else {
        const auto& nodes = std::get<PerNodeAmbiguity>(p.ambiguity).nodes;
        // non-leaf nodes: 1 + sum_{t<T} prod_{s<=t} k_s
        std::size_t expected = 1;
        std::size_t width = 1;
        for (std::size_t t = 1; t < T; ++t) {
            width *= p.stages[t - 1].atoms;
            expected += width;
        }
        for (const auto& [path, spec] : nodes) {
            const std::string where = "ambiguity node \"" + path_key(path) + "\"";
            if (!valid_path(p, path)) {
                out.push_back({where, "not a history node of the scenario tree"});
                continue;
            }
            check_spec(out, where, spec, p.stages[path.size()].atoms);
        }
        if (nodes.size() != expected) {
            out.push_back({"ambiguity", "per-node map has " + std::to_string(nodes.size()) + " entries, tree has " +
                                            std::to_string(expected) + " non-leaf nodes"});
        }
    }

    if (p.reference) {
        if (const auto* sr = std::get_if<StagewiseReference>(&*p.reference)) {
            if (sr->stages.size() != T) out.push_back({"reference", "needs one distribution per stage"});
            for (std::size_t t = 1; t <= std::min(T, sr->stages.size()); ++t) {
                const std::string where = "reference " + stage_name(t);
                if (sr->stages[t - 1].size() != p.stages[t - 1].atoms) out.push_back({where, "wrong number of atoms"});
                else if (auto v = sr->stages[t - 1].validate()) out.push_back({where, *v});
            }
        } else {
            const auto& masses = std::get<JointReference>(*p.reference).masses;
            for (const auto& [path, w] : masses) {
                const std::string where = "reference node \"" + path_key(path) + "\"";
                if (!valid_path(p, path)) {
                    out.push_back({where, "not a history node of the scenario tree"});
                    continue;
                }
                if (w.size() != p.stages[path.size()].atoms) {
                    out.push_back({where, "wrong number of atoms"});
                    continue;
                }
                double total = 0.0;
                for (double x : w) {
                    if (!std::isfinite(x) || x < 0.0) out.push_back({where, "masses must be finite and nonnegative"});
                    total += x;
                }
                double parent_mass = 1.0;
                if (!path.empty()) {
                    Path parent(path.begin(), path.end() - 1);
                    auto it = masses.find(parent);
                    parent_mass = it == masses.end() ? 0.0 : it->second[static_cast<std::size_t>(path.back())];
                }
                if (std::abs(total - parent_mass) > kProbabilitySumTol) {
                    std::ostringstream os;
                    os.precision(17);
                    os << "masses sum to " << total << " but the node has mass " << parent_mass;
                    out.push_back({where, os.str()});
                }
            }
            if (masses.find(Path{}) == masses.end()) out.push_back({"reference", "joint masses must include the root"});
        }
    }
    return out;
}

void require_valid(const Problem& problem) {
    const auto violations = validate_problem(problem);
    if (violations.empty()) return;
    std::string msg = "invalid problem:";
    for (const auto& v : violations) msg += "\n  " + v.where + ": " + v.message;
    throw InputError(msg);
}

} // namespace drsoc
