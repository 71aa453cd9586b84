#include "drsoc/models.hpp"

#include "drsoc/errors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace drsoc {

namespace {

constexpr double kMaxTableCells = 5e7;

// Exact multiple of the grid step, or an error naming the value.
long long lattice(double value, double step, const std::string& what) {
    if (!std::isfinite(value)) throw InputError(what + " is not finite");
    const double q = value / step;
    const double r = std::round(q);
    if (std::abs(q - r) > 1e-9 * std::max(1.0, std::abs(q))) {
        std::ostringstream os;
        os << what << " = " << value << " is not a multiple of the grid step " << step;
        throw InputError(os.str());
    }
    return static_cast<long long>(r);
}

struct Lattice {
    std::vector<long long> lo; // per stage 1..T+1
    std::vector<long long> hi;
    std::vector<long long> cap;
    std::vector<std::vector<long long>> demand;
};

Lattice check(const InventoryParams& p) {
    if (p.stages.empty()) throw InputError("inventory horizon must be at least 1");
    if (!(p.grid_step > 0.0) || !std::isfinite(p.grid_step)) throw InputError("grid_step must be positive");
    Lattice L;
    const long long gmin = lattice(p.grid_min, p.grid_step, "grid_min");
    const long long gmax = lattice(p.grid_max, p.grid_step, "grid_max");
    if (gmin > gmax) throw InputError("grid_min exceeds grid_max");
    L.lo.push_back(lattice(p.initial_level, p.grid_step, "initial_level"));
    L.hi.push_back(L.lo.back());
    for (std::size_t t = 0; t < p.stages.size(); ++t) {
        const auto& s = p.stages[t];
        const std::string tag = "stage " + std::to_string(t + 1) + " ";
        if (!std::isfinite(s.order_cost)) throw InputError(tag + "order_cost is not finite");
        if (!(s.backorder_cost >= 0.0) || !std::isfinite(s.backorder_cost))
            throw InputError(tag + "backorder_cost must be nonnegative");
        if (!(s.holding_cost >= 0.0) || !std::isfinite(s.holding_cost))
            throw InputError(tag + "holding_cost must be nonnegative");
        if (!(s.order_cap >= 0.0)) throw InputError(tag + "order_cap must be nonnegative");
        if (s.demand.empty()) throw InputError(tag + "has no demand atoms");
        if (s.weights.size() != s.demand.size())
            throw InputError(tag + "demand and weights differ in length");
        if (auto why = FiniteDistribution(s.weights).validate()) throw InputError(tag + "weights: " + *why);
        L.cap.push_back(lattice(s.order_cap, p.grid_step, tag + "order_cap"));
        std::vector<long long> d;
        for (std::size_t i = 0; i < s.demand.size(); ++i) {
            if (!(s.demand[i] >= 0.0)) throw InputError(tag + "demand atom " + std::to_string(i) + " is negative");
            d.push_back(lattice(s.demand[i], p.grid_step, tag + "demand atom " + std::to_string(i)));
        }
        const auto [dmin, dmax] = std::minmax_element(d.begin(), d.end());
        L.lo.push_back(L.lo.back() - *dmax);
        L.hi.push_back(L.hi.back() + L.cap.back() - *dmin);
        L.demand.push_back(std::move(d));
    }
    for (std::size_t t = 0; t < L.lo.size(); ++t) {
        if (L.lo[t] < gmin || L.hi[t] > gmax) {
            std::ostringstream os;
            os << "grid [" << p.grid_min << ", " << p.grid_max << "] does not cover the reachable levels ["
               << static_cast<double>(L.lo[t]) * p.grid_step << ", " << static_cast<double>(L.hi[t]) * p.grid_step
               << "] of stage " << t + 1;
            throw InputError(os.str());
        }
    }
    return L;
}

} // namespace

std::vector<double> inventory_levels(const InventoryParams& params, std::size_t t) {
    const Lattice L = check(params);
    if (t < 1 || t > L.lo.size()) throw InputError("stage out of range");
    std::vector<double> out;
    for (long long k = L.lo[t - 1]; k <= L.hi[t - 1]; ++k) out.push_back(static_cast<double>(k) * params.grid_step);
    return out;
}

std::vector<FiniteDistribution> inventory_reference(const InventoryParams& params) {
    std::vector<FiniteDistribution> out;
    for (const auto& s : params.stages) out.push_back(FiniteDistribution::checked(s.weights));
    return out;
}

Problem build_inventory(const InventoryParams& params, const std::vector<AmbiguitySpec>& ambiguity) {
    const Lattice L = check(params);
    const std::size_t T = params.stages.size();
    if (ambiguity.size() != T) throw InputError("inventory needs one ambiguity set per stage");
    const double s = params.grid_step;

    Problem p;
    for (std::size_t t = 0; t < T; ++t) {
        const auto& st = params.stages[t];
        const auto n = static_cast<std::size_t>(L.hi[t] - L.lo[t] + 1);
        const auto m = static_cast<std::size_t>(L.cap[t] + 1);
        const std::size_t k = st.demand.size();
        if (static_cast<double>(n) * static_cast<double>(m) * static_cast<double>(k) > kMaxTableCells)
            throw InputError("stage " + std::to_string(t + 1) + " table is too large for the grid step");
        if (dimension(ambiguity[t]) != k)
            throw InputError("stage " + std::to_string(t + 1) + " ambiguity dimension does not match the demand atoms");
        StageModel sm = StageModel::sized(n, m, k);
        for (std::size_t x = 0; x < n; ++x) {
            const long long level = L.lo[t] + static_cast<long long>(x);
            for (std::size_t u = 0; u < m; ++u) {
                for (std::size_t a = 0; a < k; ++a) {
                    const long long after = level + static_cast<long long>(u);
                    const long long next = after - L.demand[t][a];
                    const double short_units = static_cast<double>(std::max(0LL, -next)) * s;
                    const double held_units = static_cast<double>(std::max(0LL, next)) * s;
                    const double cost = st.order_cost * static_cast<double>(u) * s + st.backorder_cost * short_units +
                                        st.holding_cost * held_units;
                    sm.set(x, u, a, static_cast<int>(next - L.lo[t + 1]), cost);
                }
            }
        }
        p.stages.push_back(std::move(sm));
    }
    p.terminal_cost.assign(static_cast<std::size_t>(L.hi[T] - L.lo[T] + 1), 0.0);
    p.initial_state = 0;
    p.ambiguity = StagewiseAmbiguity{ambiguity};
    p.reference = StagewiseReference{inventory_reference(params)};
    return p;
}

Problem build_no_saddle_example() {
    StageModel sm = StageModel::sized(1, 2, 2);
    for (std::size_t u = 0; u < 2; ++u)
        for (std::size_t a = 0; a < 2; ++a) sm.set(0, u, a, 0, u == a ? 1.0 : 0.0);
    Problem p;
    p.stages.push_back(std::move(sm));
    p.terminal_cost = {0.0};
    p.ambiguity = StagewiseAmbiguity{{PolytopeH{2, {}, {}}}};
    return p;
}

} // namespace drsoc
