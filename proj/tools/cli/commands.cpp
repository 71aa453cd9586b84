#include "cli/commands.hpp"

#include "cli/io.hpp"
#include "drsoc/errors.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <iostream>
#include <limits>
#include <sstream>

#ifndef DRSOC_VERSION
#define DRSOC_VERSION "0"
#endif

namespace drsoc::cli {

namespace {

class ValidationFailed : public InputError {
public:
    explicit ValidationFailed(std::vector<Violation> v) : InputError("problem validation failed"), violations(std::move(v)) {}
    std::vector<Violation> violations;
};

json header(const RunConfig& cfg) {
    json config = {{"input", cfg.input}, {"tol", cfg.tol}, {"budget", cfg.budget}};
    if (cfg.command != "gen") config["mode"] = cfg.mode;
    if (cfg.command == "simulate") {
        config["seed"] = cfg.seed;
        config["samples"] = cfg.samples;
        config["nature"] = cfg.nature;
    }
    if (cfg.command == "check" && !cfg.report.empty()) config["report"] = cfg.report;
    return {{"schema_version", 1},
            {"tool", {{"name", "drsoc"}, {"version", DRSOC_VERSION}}},
            {"command", cfg.command},
            {"config", config}};
}

Problem load_valid(const RunConfig& cfg) {
    if (cfg.input.empty()) throw InputError("--input is required");
    Problem p = load_problem(cfg.input);
    auto violations = validate_problem(p);
    if (!violations.empty()) throw ValidationFailed(std::move(violations));
    return p;
}

json problem_summary(const Problem& p, const ScenarioTree& tree) {
    json states = json::array(), controls = json::array(), atoms = json::array();
    std::size_t pairs = 0;
    for (std::size_t t = 1; t <= p.horizon() + 1; ++t) {
        states.push_back(p.state_count(t));
        pairs += tree.stage(t).size() * p.state_count(t);
    }
    for (const auto& sm : p.stages) {
        controls.push_back(sm.controls);
        atoms.push_back(sm.atoms);
    }
    return {{"horizon", p.horizon()},   {"states", states},        {"controls", controls},
            {"atoms", atoms},           {"tree_nodes", tree.size()}, {"pairs", pairs},
            {"initial_state", p.initial_state}, {"ambiguity", p.stagewise() ? "stagewise" : "per_node"}};
}

template <class T, class F>
json row(const std::vector<T>& cells, F&& f) {
    json out = json::array();
    for (const auto& c : cells) out.push_back(f(c));
    return out;
}

const auto as_is = [](const auto& v) { return json(v); };
const auto as_dist = [](const FiniteDistribution& d) { return distribution_to_json(d); };

json pure_block(const PureSolution& s, std::size_t id) {
    return {{"values", row(s.values[id], as_is)}, {"control", row(s.policy.control[id], as_is)},
            {"nature", row(s.nature[id], as_dist)}};
}
json mixed_block(const MixedSolution& s, std::size_t id) {
    return {{"values", row(s.values[id], as_is)}, {"control", row(s.policy.control[id], as_dist)},
            {"nature", row(s.nature[id], as_dist)}};
}
json dual_block(const DualSolution& s, std::size_t id) {
    return {{"values", row(s.values[id], as_is)}, {"nature", row(s.nature[id], as_dist)},
            {"response", row(s.responses.control[id], as_is)}};
}

json node_state(const ScenarioTree& tree, NodeState at) {
    const auto& n = tree.node(at.node);
    return {{"path", path_key(n.path)}, {"stage", n.stage}, {"state", at.state}};
}

json existence_block(const SolveReport& r, const ScenarioTree& tree) {
    json failing = json::array();
    for (const auto& f : r.failing) {
        json e = node_state(tree, f.at);
        e["gap"] = f.gap;
        failing.push_back(e);
    }
    return {{"duality_holds", r.duality_holds},
            {"max_duality_gap", r.max_duality_gap},
            {"nonrandomized_exists", r.nonrandomized_exists},
            {"nonrandomized_exists_all_pairs", r.nonrandomized_exists_all_pairs},
            {"pure_policy_certified", r.pure_policy_certified},
            {"max_gap", r.max_gap},
            {"max_gap_all_pairs", r.max_gap_all_pairs},
            {"tol", r.tol},
            {"failing", failing}};
}

json solve_report(const RunConfig& cfg, const Problem& p, const ScenarioTree& tree) {
    const SolveOptions opts{cfg.tol, cfg.threads};
    json doc = header(cfg);
    doc["problem"] = problem_summary(p, tree);
    doc["terminal_cost"] = p.terminal_cost;
    json root = {{"state", p.initial_state}};
    json nodes = json::array();
    auto each_node = [&](auto&& fill) {
        std::size_t i = 0;
        for (std::size_t t = 1; t <= p.horizon(); ++t)
            for (const auto& n : tree.stage(t)) {
                if (nodes.size() <= i) nodes.push_back({{"path", path_key(n.path)}, {"stage", n.stage}});
                fill(nodes[i++], n.id);
            }
    };

    if (cfg.mode == "all") {
        const SolveReport r = existence_report(p, tree, opts);
        root["pure"] = r.root_pure();
        root["mixed"] = r.root_mixed();
        root["dual"] = r.root_dual();
        each_node([&](json& node, std::size_t id) {
            node["pure"] = pure_block(r.pure, id);
            node["mixed"] = mixed_block(r.mixed, id);
            node["dual"] = dual_block(r.dual, id);
            node["game"] = {{"gap", row(r.games[id], [](const NodeGameResult& g) { return json(g.gap); })},
                            {"saddle", row(r.games[id], [](const NodeGameResult& g) { return json(g.saddle); })},
                            {"reachable", row(r.reachable[id], [](char c) { return json(c != 0); })}};
        });
        doc["existence"] = existence_block(r, tree);
        doc["evaluation"] = {{"nested_value", evaluate_policy_nested(p, tree, r.pure.policy).nested_value}};
    } else if (cfg.mode == "pure") {
        const auto s = solve_nonrandomized(p, tree, opts);
        root["pure"] = s.values.at(0, p.initial_state);
        each_node([&](json& node, std::size_t id) { node["pure"] = pure_block(s, id); });
        doc["evaluation"] = {{"nested_value", evaluate_policy_nested(p, tree, s.policy).nested_value}};
    } else if (cfg.mode == "mixed") {
        const auto s = solve_randomized(p, tree, opts);
        root["mixed"] = s.values.at(0, p.initial_state);
        each_node([&](json& node, std::size_t id) { node["mixed"] = mixed_block(s, id); });
    } else {
        const auto s = solve_dual(p, tree, opts);
        root["dual"] = s.values.at(0, p.initial_state);
        each_node([&](json& node, std::size_t id) { node["dual"] = dual_block(s, id); });
    }
    doc["root"] = root;
    doc["nodes"] = nodes;
    return doc;
}

json status(bool pass) { return pass ? "pass" : "fail"; }

bool all_convex(const Problem& p) {
    if (const auto* sw = std::get_if<StagewiseAmbiguity>(&p.ambiguity)) {
        for (const auto& s : sw->stages)
            if (!is_convex(s)) return false;
        return true;
    }
    for (const auto& [path, s] : std::get<PerNodeAmbiguity>(p.ambiguity).nodes)
        if (!is_convex(s)) return false;
    return true;
}

// Largest difference between a stored report's value tables and a fresh
// solve; fails when the stored report does not describe this tree.
json compare_report(const json& stored, const SolveReport& r, const ScenarioTree& tree, double tol) {
    if (!stored.is_object() || stored.value("schema_version", 0) != 1 || !stored.contains("nodes") ||
        !stored["nodes"].is_array())
        return {{"status", "fail"}, {"reason", "not a version 1 solve report"}};
    double diff = 0.0;
    std::size_t compared = 0;
    std::string reason;
    for (const auto& node : stored["nodes"]) {
        if (!node.is_object() || !node.contains("path") || !node["path"].is_string()) {
            reason = "node entry without a path";
            break;
        }
        const auto id = tree.find(parse_path_key(node["path"].get<std::string>()));
        if (!id) {
            reason = "unknown node \"" + node["path"].get<std::string>() + "\"";
            break;
        }
        const std::pair<const char*, const ValueTable*> tables[] = {
            {"pure", &r.pure.values}, {"mixed", &r.mixed.values}, {"dual", &r.dual.values}};
        for (const auto& [key, table] : tables) {
            if (!node.contains(key)) continue;
            const json& values = node[key].value("values", json::array());
            const auto& fresh = (*table)[*id];
            if (values.size() != fresh.size()) {
                reason = std::string("value count differs at \"") + node["path"].get<std::string>() + "\"";
                break;
            }
            for (std::size_t x = 0; x < fresh.size(); ++x) {
                const double v = values[x].is_number() ? values[x].get<double>() : std::nan("");
                const double d = std::abs(v - fresh[x]);
                diff = std::isnan(d) ? std::numeric_limits<double>::infinity() : std::max(diff, d);
                ++compared;
            }
        }
        if (!reason.empty()) break;
    }
    if (reason.empty() && compared == 0) reason = "no values to compare";
    if (!reason.empty()) return {{"status", "fail"}, {"reason", reason}};
    return {{"status", status(diff <= tol)}, {"max_difference", diff}, {"values_compared", compared}};
}

json check_report(const RunConfig& cfg, const Problem& p, const ScenarioTree& tree, bool& passed) {
    const SolveOptions opts{cfg.tol, cfg.threads};
    const SolveReport r = existence_report(p, tree, opts);
    json checks;

    double slack = 0.0;
    for (std::size_t id = 0; id < tree.size(); ++id)
        for (std::size_t x = 0; x < r.pure.values[id].size(); ++x) {
            slack = std::max(slack, r.dual.values[id][x] - r.mixed.values[id][x]);
            slack = std::max(slack, r.mixed.values[id][x] - r.pure.values[id][x]);
        }
    checks["chain"] = {{"status", status(slack <= cfg.tol)}, {"max_violation", slack}};

    if (all_convex(p))
        checks["duality"] = {{"status", status(r.duality_holds)}, {"max_gap", r.max_duality_gap}};
    else
        checks["duality"] = {{"status", "not_applicable"}, {"reason", "nonconvex ambiguity set"}, {"max_gap", r.max_duality_gap}};

    const double nested = evaluate_policy_nested(p, tree, r.pure.policy).nested_value;
    const double nested_diff = std::abs(nested - r.root_pure());
    checks["nested_consistency"] = {{"status", status(nested_diff <= cfg.tol)}, {"nested_value", nested}, {"difference", nested_diff}};

    if (p.stagewise()) {
        try {
            const double stat = evaluate_policy_static_worstcase(p, tree, r.pure.policy);
            checks["static_vs_nested"] = {{"status", status(stat <= nested + cfg.tol)}, {"static_value", stat}, {"nested_value", nested}};
        } catch (const std::exception& e) {
            checks["static_vs_nested"] = {{"status", "skipped"}, {"reason", e.what()}};
        }
    } else {
        checks["static_vs_nested"] = {{"status", "skipped"}, {"reason", "ambiguity is assigned per node"}};
    }

    // a missing saddle is a property of the instance, not a defect
    checks["saddle"] = {{"status", r.nonrandomized_exists ? "pass" : "expected_failure"},
                        {"max_gap", r.max_gap},
                        {"failing_pairs", r.failing.size()}};

    if (!cfg.report.empty()) checks["report_match"] = compare_report(read_json_file(cfg.report), r, tree, cfg.tol);

    passed = true;
    for (auto it = checks.begin(); it != checks.end(); ++it) passed = passed && it.value()["status"] != "fail";
    json doc = header(cfg);
    doc["problem"] = problem_summary(p, tree);
    doc["checks"] = checks;
    doc["passed"] = passed;
    return doc;
}

NatureStrategy load_nature(const RunConfig& cfg, const Problem& p, const ScenarioTree& tree, const NatureStrategy& worst) {
    if (cfg.nature == "worst") return worst;
    std::vector<FiniteDistribution> per_node(tree.size());
    if (cfg.nature == "reference") {
        if (!p.reference) throw InputError("--nature reference needs a problem reference measure");
        for (std::size_t t = 1; t <= p.horizon(); ++t)
            for (const auto& n : tree.stage(t))
                if (auto q = conditional_reference(*p.reference, n.path)) per_node[n.id] = *q;
        return nature_per_node(p, tree, per_node);
    }
    const json doc = read_json_file(cfg.nature);
    if (!doc.is_object() || !doc.contains("per_node") || !doc["per_node"].is_object())
        throw InputError("nature file: expected {\"per_node\": {path: weights}}");
    for (auto it = doc["per_node"].begin(); it != doc["per_node"].end(); ++it) {
        const auto id = tree.find(parse_path_key(it.key()));
        if (!id) throw InputError("nature file: unknown node \"" + it.key() + "\"");
        if (!it.value().is_array()) throw InputError("nature file: weights at \"" + it.key() + "\" must be an array");
        std::vector<double> w;
        for (const auto& v : it.value()) {
            if (!v.is_number()) throw InputError("nature file: weights at \"" + it.key() + "\" must be numbers");
            w.push_back(v.get<double>());
        }
        per_node[*id] = FiniteDistribution(std::move(w));
    }
    return nature_per_node(p, tree, per_node);
}

json simulate_report(const RunConfig& cfg, const Problem& p, const ScenarioTree& tree) {
    if (cfg.samples == 0) throw InputError("--samples must be positive");
    const SolveOptions opts{cfg.tol, cfg.threads};
    const RolloutOptions ro{cfg.samples, cfg.seed, cfg.threads};
    json eval;
    if (cfg.mode == "pure" || cfg.mode == "all") {
        const auto s = solve_nonrandomized(p, tree, opts);
        const auto nature = load_nature(cfg, p, tree, s.nature);
        const auto stats = monte_carlo_rollout(p, tree, s.policy, nature, ro);
        eval = {{"policy", "pure"},
                {"value", s.values.at(0, p.initial_state)},
                {"exact_expected", expected_cost(p, tree, s.policy, nature)},
                {"nested_value", evaluate_policy_nested(p, tree, s.policy).nested_value}};
        if (p.stagewise()) {
            try {
                eval["static_value"] = evaluate_policy_static_worstcase(p, tree, s.policy);
            } catch (const InputError&) {
                // static value is optional; too many products or no vertex list
            }
        }
        eval["rollout"] = {{"mean", stats.mean}, {"std_error", stats.std_error}, {"samples", stats.samples},
                           {"seed", stats.seed}, {"rng", stats.rng}, {"block_size", kRolloutBlockSize}};
    } else if (cfg.mode == "mixed") {
        const auto s = solve_randomized(p, tree, opts);
        const auto nature = load_nature(cfg, p, tree, s.nature);
        const auto stats = monte_carlo_rollout(p, tree, s.policy, nature, ro);
        eval = {{"policy", "mixed"},
                {"value", s.values.at(0, p.initial_state)},
                {"exact_expected", expected_cost(p, tree, s.policy, nature)}};
        eval["rollout"] = {{"mean", stats.mean}, {"std_error", stats.std_error}, {"samples", stats.samples},
                           {"seed", stats.seed}, {"rng", stats.rng}, {"block_size", kRolloutBlockSize}};
    } else {
        throw InputError("simulate supports --mode pure or mixed");
    }
    eval["nature"] = cfg.nature == "worst" || cfg.nature == "reference" ? cfg.nature : "file";
    json doc = header(cfg);
    doc["problem"] = problem_summary(p, tree);
    doc["evaluation"] = eval;
    return doc;
}

json gen_document(const RunConfig& cfg) {
    if (cfg.target == "no-saddle") return problem_to_json(build_no_saddle_example());
    if (cfg.target == "inventory") {
        if (cfg.config.empty()) throw InputError("gen inventory needs --config");
        const auto ic = inventory_from_json(read_json_file(cfg.config));
        Problem p = build_inventory(ic.params, ic.ambiguity);
        auto violations = validate_problem(p);
        if (!violations.empty()) throw ValidationFailed(std::move(violations));
        return problem_to_json(p);
    }
    throw InputError("gen: unknown model \"" + cfg.target + "\" (expected inventory or no-saddle)");
}

void emit(const RunConfig& cfg, const json& doc, std::ostream& out) {
    const std::string text = to_text(doc);
    if (cfg.out.empty())
        out << text;
    else
        write_atomically(cfg.out, text);
}

void diagnose(std::ostream& err, const char* kind, const std::string& message, const json& extra = json()) {
    json doc = {{"error", kind}, {"message", message}};
    if (!extra.is_null()) doc["violations"] = extra;
    err << to_text(doc);
}

} // namespace

int run(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    try {
        if (!(cfg.tol > 0.0) || !std::isfinite(cfg.tol)) throw InputError("--tol must be positive");
        if (cfg.mode != "all" && cfg.mode != "pure" && cfg.mode != "mixed" && cfg.mode != "dual")
            throw InputError("--mode must be pure, mixed, dual or all");
        if (cfg.command == "gen") {
            emit(cfg, gen_document(cfg), out);
            return kOk;
        }
        const Problem p = load_valid(cfg);
        const ScenarioTree tree = build_scenario_tree(p, cfg.budget);
        if (cfg.command == "solve") {
            emit(cfg, solve_report(cfg, p, tree), out);
            return kOk;
        }
        if (cfg.command == "check") {
            bool passed = false;
            emit(cfg, check_report(cfg, p, tree, passed), out);
            return passed ? kOk : kCheckFailed;
        }
        if (cfg.command == "simulate") {
            emit(cfg, simulate_report(cfg, p, tree), out);
            return kOk;
        }
        throw InputError("unknown command \"" + cfg.command + "\"");
    } catch (const ValidationFailed& e) {
        json list = json::array();
        for (const auto& v : e.violations) list.push_back({{"where", v.where}, {"message", v.message}});
        diagnose(err, "validation", e.what(), list);
        return kInputError;
    } catch (const InputError& e) {
        diagnose(err, "input", e.what());
        return kInputError;
    } catch (const SolverError& e) {
        diagnose(err, "solver", e.what());
        return kSolverError;
    } catch (const std::bad_alloc&) {
        diagnose(err, "solver", "out of memory");
        return kSolverError;
    }
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Distributionally robust stochastic optimal control solver", "drsoc"};
    app.set_version_flag("--version", DRSOC_VERSION);
    app.require_subcommand(1);
    RunConfig cfg;

    auto common = [&](CLI::App* sub, bool needs_input) {
        auto* in = sub->add_option("--input", cfg.input, "Problem file (JSON)");
        if (needs_input) in->required();
        sub->add_option("--out", cfg.out, "Output file (stdout when omitted)");
        sub->add_option("--tol", cfg.tol, "Saddle and duality tolerance")->capture_default_str();
        sub->add_option("--budget", cfg.budget, "Maximum (node, state) pairs")->capture_default_str();
        sub->add_option("--threads", cfg.threads, "Worker threads (0 = hardware)")->capture_default_str();
    };
    auto modes = CLI::IsMember({"pure", "mixed", "dual", "all"});

    auto* solve = app.add_subcommand("solve", "Solve the three recursions and report values and policies");
    common(solve, true);
    solve->add_option("--mode", cfg.mode, "pure | mixed | dual | all")->check(modes)->capture_default_str();

    auto* check = app.add_subcommand("check", "Run the invariant checks");
    common(check, true);
    check->add_option("--report", cfg.report, "Compare a stored solve report with a fresh solve");

    auto* simulate = app.add_subcommand("simulate", "Monte Carlo rollout of the optimal policy");
    common(simulate, true);
    simulate->add_option("--mode", cfg.mode, "pure | mixed")->check(CLI::IsMember({"pure", "mixed", "all"}));
    simulate->add_option("--seed", cfg.seed, "Random seed")->capture_default_str();
    simulate->add_option("--samples", cfg.samples, "Number of trajectories")->capture_default_str();
    simulate->add_option("--nature", cfg.nature, "worst | reference | nature file")->capture_default_str();

    auto* gen = app.add_subcommand("gen", "Write a model problem file");
    gen->add_option("model", cfg.target, "inventory | no-saddle")->required();
    gen->add_option("--config", cfg.config, "Inventory config (JSON)");
    gen->add_option("--out", cfg.out, "Output file (stdout when omitted)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kOk;
    } catch (const CLI::CallForVersion&) {
        out << DRSOC_VERSION << "\n";
        return kOk;
    } catch (const CLI::ParseError& e) {
        diagnose(err, "usage", e.what());
        return kInputError;
    }
    for (auto* sub : {solve, check, simulate, gen})
        if (sub->parsed()) cfg.command = sub->get_name();
    if (cfg.command == "simulate" && cfg.mode == "all") cfg.mode = "pure";
    return run(cfg, out, err);
}

} // namespace drsoc::cli
