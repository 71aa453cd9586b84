#pragma once

#include "drsoc/models.hpp"
#include "drsoc/problem.hpp"

#include <json.hpp>

#include <string>
#include <utility>
#include <vector>

namespace drsoc::cli {

using nlohmann::json;

/// Deterministic JSON text: keys sorted, reals printed with 17 significant
/// digits, non-finite reals as null.
std::string to_text(const json& value);

/// Reads and parses a JSON file. Throws InputError on I/O or syntax errors.
json read_json_file(const std::string& path);

/// Writes through a temporary file in the same directory and renames it.
void write_atomically(const std::string& path, const std::string& text);

json distribution_to_json(const FiniteDistribution& d);
json spec_to_json(const AmbiguitySpec& spec);

/**
 * Problem files. cvar and wasserstein specs may omit "reference"; the
 * problem-level reference then fills it in, conditioned on the node's history
 * when the reference is given per node. Stagewise sets needing a per-node
 * reference are expanded to one set per node.
 */
Problem problem_from_json(const json& doc);
json problem_to_json(const Problem& problem);
Problem load_problem(const std::string& path);

struct InventoryConfig {
    InventoryParams params;
    std::vector<AmbiguitySpec> ambiguity;
};

/// Inventory generator config; each stage may carry an "ambiguity" spec
/// (singleton on the stage weights when absent).
InventoryConfig inventory_from_json(const json& doc);

} // namespace drsoc::cli
