#pragma once

#include "drsoc/problem.hpp"

#include <cstddef>
#include <vector>

namespace drsoc {

/// One stage of the inventory model. Costs are per unit.
struct InventoryStage {
    double order_cost = 0.0;
    double backorder_cost = 0.0;
    double holding_cost = 0.0;
    /// Orders are 0, step, ..., order_cap.
    double order_cap = 0.0;
    std::vector<double> demand;
    /// Reference weights over `demand`.
    std::vector<double> weights;
};

struct InventoryParams {
    std::vector<InventoryStage> stages;
    /// Lattice spacing shared by levels, orders and demands.
    double grid_step = 1.0;
    double grid_min = 0.0;
    double grid_max = 0.0;
    double initial_level = 0.0;
};

/// Reachable inventory levels of stage t (1..T+1), in lattice order.
std::vector<double> inventory_levels(const InventoryParams& params, std::size_t t);

/**
 * Tabular inventory problem: level x, order u, demand d move to x + u - d at
 * cost c u + b (d - x - u)+ + h (x + u - d)+, terminal cost zero. Stage t's
 * states are the lattice levels reachable from the initial level, so no
 * transition is clipped. Throws InputError when a demand, cap or bound is off
 * the lattice or the grid bounds do not cover the reachable levels.
 */
Problem build_inventory(const InventoryParams& params, const std::vector<AmbiguitySpec>& ambiguity);

/// Reference demand distribution of each stage.
std::vector<FiniteDistribution> inventory_reference(const InventoryParams& params);

/// One state, controls and atoms {0, 1}, cost 1 when the control matches the
/// atom, nature free over the whole simplex.
Problem build_no_saddle_example();

} // namespace drsoc
