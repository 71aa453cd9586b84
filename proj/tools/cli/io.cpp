#include "cli/io.hpp"

#include "drsoc/errors.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <unistd.h>

namespace drsoc::cli {

namespace {

void emit(std::string& out, const json& v, int depth) {
    const std::string pad(static_cast<std::size_t>(2 * (depth + 1)), ' ');
    const std::string close(static_cast<std::size_t>(2 * depth), ' ');
    switch (v.type()) {
    case json::value_t::object: {
        if (v.empty()) {
            out += "{}";
            return;
        }
        out += "{\n";
        bool first = true;
        for (auto it = v.begin(); it != v.end(); ++it) {
            if (!first) out += ",\n";
            first = false;
            out += pad + json(it.key()).dump() + ": ";
            emit(out, it.value(), depth + 1);
        }
        out += "\n" + close + "}";
        return;
    }
    case json::value_t::array: {
        if (v.empty()) {
            out += "[]";
            return;
        }
        // arrays of scalars stay on one line
        bool flat = true;
        for (const auto& e : v) flat = flat && !e.is_structured();
        out += flat ? "[" : "[\n";
        bool first = true;
        for (const auto& e : v) {
            if (!first) out += flat ? ", " : ",\n";
            first = false;
            if (!flat) out += pad;
            emit(out, e, depth + 1);
        }
        out += flat ? "]" : "\n" + close + "]";
        return;
    }
    case json::value_t::number_float: {
        const double d = v.get<double>();
        if (!std::isfinite(d)) {
            out += "null";
            return;
        }
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.17g", d);
        out += buf;
        return;
    }
    default:
        out += v.dump();
    }
}

std::string at(const std::string& where, const std::string& key) { return where.empty() ? key : where + "." + key; }

const json& field(const json& obj, const std::string& key, const std::string& where) {
    if (!obj.is_object()) throw InputError(where + ": expected an object");
    auto it = obj.find(key);
    if (it == obj.end()) throw InputError(at(where, key) + ": missing");
    return *it;
}

double real(const json& v, const std::string& where) {
    if (!v.is_number()) throw InputError(where + ": expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) throw InputError(where + ": not finite");
    return d;
}

std::size_t index(const json& v, const std::string& where) {
    if (!v.is_number_integer() || v.get<long long>() < 0) throw InputError(where + ": expected a nonnegative integer");
    return v.get<std::size_t>();
}

const json& array(const json& v, const std::string& where) {
    if (!v.is_array()) throw InputError(where + ": expected an array");
    return v;
}

std::vector<double> reals(const json& v, const std::string& where) {
    std::vector<double> out;
    for (std::size_t i = 0; i < array(v, where).size(); ++i) out.push_back(real(v[i], where + "[" + std::to_string(i) + "]"));
    return out;
}

DenseMatrix matrix(const json& v, const std::string& where) {
    DenseMatrix out;
    for (std::size_t i = 0; i < array(v, where).size(); ++i) out.push_back(reals(v[i], where + "[" + std::to_string(i) + "]"));
    return out;
}

// Missing references are parsed as empty distributions and resolved later.
AmbiguitySpec spec_from_json(const json& j, const std::string& where) {
    const std::string type = field(j, "type", where).is_string() ? j["type"].get<std::string>() : "";
    auto optional_ref = [&]() {
        return j.contains("reference") ? FiniteDistribution(reals(j["reference"], at(where, "reference")))
                                       : FiniteDistribution();
    };
    if (type == "singleton") return Singleton{FiniteDistribution(reals(field(j, "distribution", where), at(where, "distribution")))};
    if (type == "finite_set") {
        FiniteSet fs;
        for (auto& row : matrix(field(j, "members", where), at(where, "members"))) fs.members.emplace_back(std::move(row));
        if (j.contains("convexify")) {
            if (!j["convexify"].is_boolean()) throw InputError(at(where, "convexify") + ": expected a boolean");
            fs.convexify = j["convexify"].get<bool>();
        }
        return fs;
    }
    if (type == "cvar") return CvarBall{optional_ref(), real(field(j, "alpha", where), at(where, "alpha"))};
    if (type == "wasserstein")
        return WassersteinBall{optional_ref(), real(field(j, "radius", where), at(where, "radius")),
                               matrix(field(j, "metric", where), at(where, "metric"))};
    if (type == "polytope") {
        PolytopeH poly;
        poly.dim = index(field(j, "dim", where), at(where, "dim"));
        if (j.contains("G")) poly.G = matrix(j["G"], at(where, "G"));
        if (j.contains("h")) poly.h = reals(j["h"], at(where, "h"));
        return poly;
    }
    throw InputError(at(where, "type") + ": unknown ambiguity type \"" + type + "\"");
}

FiniteDistribution* missing_reference(AmbiguitySpec& spec) {
    if (auto* c = std::get_if<CvarBall>(&spec)) return c->reference.size() == 0 ? &c->reference : nullptr;
    if (auto* w = std::get_if<WassersteinBall>(&spec)) return w->reference.size() == 0 ? &w->reference : nullptr;
    return nullptr;
}

std::vector<Path> paths_of_stage(const Problem& p, std::size_t t) {
    std::vector<Path> frontier{Path{}};
    for (std::size_t s = 1; s < t; ++s) {
        std::vector<Path> next;
        for (const auto& path : frontier)
            for (std::size_t a = 0; a < p.stages[s - 1].atoms; ++a) {
                Path child = path;
                child.push_back(static_cast<int>(a));
                next.push_back(std::move(child));
            }
        frontier = std::move(next);
    }
    return frontier;
}

// `stage_only` marks stagewise sets, whose path only carries the stage.
void resolve_reference(const Problem& p, AmbiguitySpec& spec, const Path& path, bool stage_only = false) {
    FiniteDistribution* slot = missing_reference(spec);
    if (!slot) return;
    const std::string node =
        stage_only ? "stage " + std::to_string(path.size() + 1) : "history \"" + path_key(path) + "\"";
    if (!p.reference) throw InputError(std::string(spec_type_name(spec)) + " set at " + node + " has no reference measure");
    if (const auto* sw = std::get_if<StagewiseReference>(&*p.reference)) {
        if (path.size() >= sw->stages.size()) throw InputError("reference has no stage for " + node);
        *slot = sw->stages[path.size()];
        return;
    }
    auto q = conditional_reference(*p.reference, path);
    if (!q) throw InputError("reference has zero mass at " + node + "; the conditional reference is undefined");
    *slot = *q;
}

void resolve_references(Problem& p) {
    if (auto* sw = std::get_if<StagewiseAmbiguity>(&p.ambiguity)) {
        bool missing = false;
        for (auto& spec : sw->stages) missing = missing || missing_reference(spec) != nullptr;
        if (!missing) return;
        if (!p.reference || std::holds_alternative<StagewiseReference>(*p.reference)) {
            for (std::size_t t = 0; t < sw->stages.size(); ++t) {
                resolve_reference(p, sw->stages[t], Path(t, 0), true);
            }
            return;
        }
        if (sw->stages.size() != p.horizon()) return; // validation reports the mismatch
        PerNodeAmbiguity pn;
        for (std::size_t t = 1; t <= p.horizon(); ++t)
            for (const auto& path : paths_of_stage(p, t)) {
                AmbiguitySpec spec = sw->stages[t - 1];
                resolve_reference(p, spec, path);
                pn.nodes.emplace(path, std::move(spec));
            }
        p.ambiguity = std::move(pn);
        return;
    }
    for (auto& [path, spec] : std::get<PerNodeAmbiguity>(p.ambiguity).nodes) resolve_reference(p, spec, path);
}

} // namespace

std::string to_text(const json& value) {
    std::string out;
    emit(out, value, 0);
    out += "\n";
    return out;
}

json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open \"" + path + "\"");
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw InputError("\"" + path + "\" is not valid JSON: " + e.what());
    }
}

void write_atomically(const std::string& path, const std::string& text) {
    namespace fs = std::filesystem;
    const fs::path target(path);
    fs::path tmp = target;
    tmp += ".tmp." + std::to_string(::getpid());
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw InputError("cannot write \"" + tmp.string() + "\"");
        out << text;
        out.flush();
        if (!out) throw InputError("cannot write \"" + tmp.string() + "\"");
    }
    std::error_code ec;
    fs::rename(tmp, target, ec);
    if (ec) {
        fs::remove(tmp, ec);
        throw InputError("cannot replace \"" + path + "\"");
    }
}

json distribution_to_json(const FiniteDistribution& d) {
    json out = json::array();
    for (double w : d.weights()) out.push_back(w);
    return out;
}

json spec_to_json(const AmbiguitySpec& spec) {
    return std::visit(
        [](const auto& s) -> json {
            using S = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<S, Singleton>) {
                return {{"type", "singleton"}, {"distribution", distribution_to_json(s.dist)}};
            } else if constexpr (std::is_same_v<S, FiniteSet>) {
                json members = json::array();
                for (const auto& m : s.members) members.push_back(distribution_to_json(m));
                return {{"type", "finite_set"}, {"members", members}, {"convexify", s.convexify}};
            } else if constexpr (std::is_same_v<S, CvarBall>) {
                return {{"type", "cvar"}, {"reference", distribution_to_json(s.reference)}, {"alpha", s.alpha}};
            } else if constexpr (std::is_same_v<S, WassersteinBall>) {
                return {{"type", "wasserstein"},
                        {"reference", distribution_to_json(s.reference)},
                        {"radius", s.radius},
                        {"metric", s.metric}};
            } else {
                return {{"type", "polytope"}, {"dim", s.dim}, {"G", s.G}, {"h", s.h}};
            }
        },
        spec);
}

Problem problem_from_json(const json& doc) {
    try {
        Problem p;
        const std::size_t horizon = index(field(doc, "horizon", ""), "horizon");
        const json& stages = array(field(doc, "stages", ""), "stages");
        if (stages.size() != horizon)
            throw InputError("stages: " + std::to_string(stages.size()) + " entries for horizon " + std::to_string(horizon));
        for (std::size_t t = 0; t < stages.size(); ++t) {
            const std::string w = "stages[" + std::to_string(t) + "]";
            const json& s = stages[t];
            const std::size_t n = index(field(s, "states", w), at(w, "states"));
            const std::size_t m = index(field(s, "controls", w), at(w, "controls"));
            const std::size_t k = index(field(s, "atoms", w), at(w, "atoms"));
            StageModel sm = StageModel::sized(n, m, k);
            const json& next = array(field(s, "next", w), at(w, "next"));
            const json& cost = array(field(s, "cost", w), at(w, "cost"));
            auto cell = [&](const json& table, const std::string& name, std::size_t x, std::size_t u,
                            std::size_t a) -> const json& {
                const std::string where = at(w, name) + "[" + std::to_string(x) + "][" + std::to_string(u) + "][" +
                                          std::to_string(a) + "]";
                if (table.size() != n || !table[x].is_array() || table[x].size() != m || !table[x][u].is_array() ||
                    table[x][u].size() != k)
                    throw InputError(where + ": table shape does not match states x controls x atoms");
                return table[x][u][a];
            };
            for (std::size_t x = 0; x < n; ++x)
                for (std::size_t u = 0; u < m; ++u)
                    for (std::size_t a = 0; a < k; ++a) {
                        const std::string where =
                            w + "[" + std::to_string(x) + "][" + std::to_string(u) + "][" + std::to_string(a) + "]";
                        const json& nv = cell(next, "next", x, u, a);
                        if (!nv.is_number_integer()) throw InputError(at(w, "next") + where.substr(w.size()) + ": expected an integer");
                        sm.next[sm.index(x, u, a)] = nv.get<int>();
                        sm.cost[sm.index(x, u, a)] = real(cell(cost, "cost", x, u, a), at(w, "cost") + where.substr(w.size()));
                    }
            if (n == 0 && (!next.empty() || !cost.empty())) throw InputError(w + ": tables given for zero states");
            p.stages.push_back(std::move(sm));
        }
        p.terminal_cost = reals(field(doc, "terminal_cost", ""), "terminal_cost");
        p.initial_state = index(field(doc, "initial_state", ""), "initial_state");

        const json& amb = field(doc, "ambiguity", "");
        if (amb.contains("stagewise") == amb.contains("per_node"))
            throw InputError("ambiguity: expected exactly one of \"stagewise\" or \"per_node\"");
        if (amb.contains("stagewise")) {
            StagewiseAmbiguity sw;
            const json& list = array(amb["stagewise"], "ambiguity.stagewise");
            for (std::size_t t = 0; t < list.size(); ++t)
                sw.stages.push_back(spec_from_json(list[t], "ambiguity.stagewise[" + std::to_string(t) + "]"));
            p.ambiguity = std::move(sw);
        } else {
            const json& map = amb["per_node"];
            if (!map.is_object()) throw InputError("ambiguity.per_node: expected an object");
            PerNodeAmbiguity pn;
            for (auto it = map.begin(); it != map.end(); ++it)
                pn.nodes.emplace(parse_path_key(it.key()), spec_from_json(it.value(), "ambiguity.per_node[\"" + it.key() + "\"]"));
            p.ambiguity = std::move(pn);
        }

        if (doc.contains("reference")) {
            const json& ref = doc["reference"];
            if (ref.is_array()) {
                StagewiseReference sr;
                for (std::size_t t = 0; t < ref.size(); ++t)
                    sr.stages.emplace_back(reals(ref[t], "reference[" + std::to_string(t) + "]"));
                p.reference = std::move(sr);
            } else if (ref.is_object()) {
                JointReference jr;
                for (auto it = ref.begin(); it != ref.end(); ++it)
                    jr.masses.emplace(parse_path_key(it.key()), reals(it.value(), "reference[\"" + it.key() + "\"]"));
                p.reference = std::move(jr);
            } else {
                throw InputError("reference: expected an array of stage weights or an object of joint masses");
            }
        }
        resolve_references(p);
        return p;
    } catch (const json::exception& e) {
        throw InputError(std::string("malformed problem: ") + e.what());
    }
}

json problem_to_json(const Problem& p) {
    json doc;
    doc["horizon"] = p.horizon();
    json stages = json::array();
    for (const auto& sm : p.stages) {
        json next = json::array();
        json cost = json::array();
        for (std::size_t x = 0; x < sm.states; ++x) {
            json nx = json::array();
            json cx = json::array();
            for (std::size_t u = 0; u < sm.controls; ++u) {
                json nu = json::array();
                json cu = json::array();
                for (std::size_t a = 0; a < sm.atoms; ++a) {
                    nu.push_back(sm.next[sm.index(x, u, a)]);
                    cu.push_back(sm.cost[sm.index(x, u, a)]);
                }
                nx.push_back(nu);
                cx.push_back(cu);
            }
            next.push_back(nx);
            cost.push_back(cx);
        }
        stages.push_back({{"states", sm.states}, {"controls", sm.controls}, {"atoms", sm.atoms}, {"next", next}, {"cost", cost}});
    }
    doc["stages"] = stages;
    doc["terminal_cost"] = p.terminal_cost;
    doc["initial_state"] = p.initial_state;
    if (const auto* sw = std::get_if<StagewiseAmbiguity>(&p.ambiguity)) {
        json list = json::array();
        for (const auto& s : sw->stages) list.push_back(spec_to_json(s));
        doc["ambiguity"] = {{"stagewise", list}};
    } else {
        json map = json::object();
        for (const auto& [path, spec] : std::get<PerNodeAmbiguity>(p.ambiguity).nodes) map[path_key(path)] = spec_to_json(spec);
        doc["ambiguity"] = {{"per_node", map}};
    }
    if (p.reference) {
        if (const auto* sr = std::get_if<StagewiseReference>(&*p.reference)) {
            json list = json::array();
            for (const auto& d : sr->stages) list.push_back(distribution_to_json(d));
            doc["reference"] = list;
        } else {
            json map = json::object();
            for (const auto& [path, m] : std::get<JointReference>(*p.reference).masses) map[path_key(path)] = m;
            doc["reference"] = map;
        }
    }
    return doc;
}

Problem load_problem(const std::string& path) { return problem_from_json(read_json_file(path)); }

InventoryConfig inventory_from_json(const json& doc) {
    try {
        InventoryConfig cfg;
        auto& ip = cfg.params;
        ip.grid_step = doc.contains("grid_step") ? real(doc["grid_step"], "grid_step") : 1.0;
        ip.grid_min = real(field(doc, "grid_min", ""), "grid_min");
        ip.grid_max = real(field(doc, "grid_max", ""), "grid_max");
        ip.initial_level = doc.contains("initial_level") ? real(doc["initial_level"], "initial_level") : 0.0;
        const json& stages = array(field(doc, "stages", ""), "stages");
        if (doc.contains("horizon") && index(doc["horizon"], "horizon") != stages.size())
            throw InputError("stages: count differs from horizon");
        for (std::size_t t = 0; t < stages.size(); ++t) {
            const std::string w = "stages[" + std::to_string(t) + "]";
            const json& s = stages[t];
            InventoryStage st;
            st.order_cost = s.contains("order_cost") ? real(s["order_cost"], at(w, "order_cost")) : 0.0;
            st.backorder_cost = real(field(s, "backorder_cost", w), at(w, "backorder_cost"));
            st.holding_cost = real(field(s, "holding_cost", w), at(w, "holding_cost"));
            st.order_cap = real(field(s, "order_cap", w), at(w, "order_cap"));
            st.demand = reals(field(s, "demand", w), at(w, "demand"));
            st.weights = reals(field(s, "weights", w), at(w, "weights"));
            AmbiguitySpec spec = Singleton{FiniteDistribution(st.weights)};
            if (s.contains("ambiguity")) {
                spec = spec_from_json(s["ambiguity"], at(w, "ambiguity"));
                if (FiniteDistribution* slot = missing_reference(spec)) *slot = FiniteDistribution(st.weights);
            }
            ip.stages.push_back(std::move(st));
            cfg.ambiguity.push_back(std::move(spec));
        }
        return cfg;
    } catch (const json::exception& e) {
        throw InputError(std::string("malformed inventory config: ") + e.what());
    }
}

} // namespace drsoc::cli
