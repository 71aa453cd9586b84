#pragma once

#include "drsoc/distribution.hpp"
#include "drsoc/lp.hpp"
#include "drsoc/path.hpp"

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace drsoc {

using DenseMatrix = std::vector<std::vector<double>>;

/// Largest dimension accepted by vertex enumeration.
inline constexpr std::size_t kEnumerationGuard = 6;

struct Singleton {
    FiniteDistribution dist;
};

/// A listed family of measures. With convexify set the family stands for its
/// convex hull; otherwise worst cases are taken over the members only.
struct FiniteSet {
    std::vector<FiniteDistribution> members;
    bool convexify = false;
};

/// Measures with density at most 1/(1-alpha) against the reference: the dual
/// set of the Average Value-at-Risk at level alpha.
struct CvarBall {
    FiniteDistribution reference;
    double alpha = 0.0;
};

/// Measures within transport distance `radius` of the reference under the
/// ground cost `metric` (symmetric, nonnegative, zero diagonal).
struct WassersteinBall {
    FiniteDistribution reference;
    double radius = 0.0;
    DenseMatrix metric;
};

/// {p in simplex : G p <= h}. The simplex constraints are implicit.
struct PolytopeH {
    std::size_t dim = 0;
    DenseMatrix G;
    std::vector<double> h;

    /// Validates shapes and nonemptiness (one feasibility LP). Throws InputError.
    static PolytopeH make(std::size_t dim, DenseMatrix G, std::vector<double> h);
};

using AmbiguitySpec = std::variant<Singleton, FiniteSet, CvarBall, WassersteinBall, PolytopeH>;

const char* spec_type_name(const AmbiguitySpec& spec);
std::size_t dimension(const AmbiguitySpec& spec);
/// False only for FiniteSet without convexify.
bool is_convex(const AmbiguitySpec& spec);
std::optional<std::string> validate_spec(const AmbiguitySpec& spec);

/// Same ambiguity set for every history at a stage.
struct StagewiseAmbiguity {
    std::vector<AmbiguitySpec> stages;
};

/// One ambiguity set per non-leaf history node, keyed by path.
struct PerNodeAmbiguity {
    std::map<Path, AmbiguitySpec> nodes;
};

using AmbiguityAssignment = std::variant<StagewiseAmbiguity, PerNodeAmbiguity>;

/// Reference measure given by its per-stage marginals (stagewise independent).
struct StagewiseReference {
    std::vector<FiniteDistribution> stages;
};

/// Joint reference measure given node by node: masses[path][i] is the joint
/// probability of the history path followed by atom i. Child masses of a node
/// sum to that node's own mass; the root's sum to one.
struct JointReference {
    std::map<Path, std::vector<double>> masses;
};

using ReferenceMeasure = std::variant<StagewiseReference, JointReference>;

/// Conditional reference at the node `path` (Bayes rule on the joint masses).
/// Returns nullopt when the history has zero reference mass.
std::optional<FiniteDistribution> conditional_reference(const ReferenceMeasure& ref, const Path& path);

/**
 * Polytope over (p, w): p are probability coordinates on the simplex, w are
 * nonnegative auxiliary variables of a lifted formulation. Rows act on the
 * concatenated vector [p; w]. The simplex constraints on p are implicit.
 */
struct LiftedPolytope {
    std::size_t dim = 0;
    std::size_t aux = 0;
    DenseMatrix ineq;
    std::vector<double> ineq_rhs;
    DenseMatrix eq;
    std::vector<double> eq_rhs;

    std::size_t width() const { return dim + aux; }
};

/// H-representation of a convex spec, lifted for Wasserstein balls (coupling
/// variables) and convexified finite sets (hull weights).
/// Throws InputError for a FiniteSet without convexify and for empty sets.
LiftedPolytope to_polytope(const AmbiguitySpec& spec, std::size_t k);

/// Variables a polytope occupies inside a larger LP.
struct PolytopeVars {
    std::size_t p_begin = 0;
    std::size_t aux_begin = 0;
};

/// Appends p, w (both >= 0), the simplex row and the polytope rows to `lp`.
PolytopeVars append_polytope(lp::LinearProgram& lp, const LiftedPolytope& poly);

struct WorstCase {
    double value = 0.0;
    FiniteDistribution maximizer;
};

/// sup over the ambiguity set of E_P[z].
WorstCase worst_case_expectation(const AmbiguitySpec& spec, std::span<const double> z);

/**
 * An ambiguity spec with its polytope built once, for repeated oracle calls.
 * For a FiniteSet without convexify, hull() is the polytope of the convex hull
 * while worst_case() still enumerates the members.
 */
class AmbiguitySet {
public:
    explicit AmbiguitySet(AmbiguitySpec spec);

    const AmbiguitySpec& spec() const { return spec_; }
    std::size_t dim() const { return dim_; }
    /// True when worst cases are found by enumerating a finite list.
    bool enumerated() const { return !members_.empty(); }
    const std::vector<FiniteDistribution>& members() const { return members_; }
    const LiftedPolytope& hull() const { return hull_; }

    WorstCase worst_case(std::span<const double> z) const;

private:
    AmbiguitySpec spec_;
    std::size_t dim_ = 0;
    std::vector<FiniteDistribution> members_;
    LiftedPolytope hull_;
};

/// Clamps LP noise out of a probability vector (entries within 1e-13 of 0 or 1 snap).
FiniteDistribution clean_distribution(std::vector<double> p);

/// Average Value-at-Risk of the discrete variable (z, q) by tail filling.
double cvar_closed_form(std::span<const double> z, const FiniteDistribution& q, double alpha);

/// Vertices of a non-lifted polytope (aux == 0) with dim <= kEnumerationGuard.
std::vector<FiniteDistribution> vertex_enumerate(const LiftedPolytope& poly);
std::vector<FiniteDistribution> vertex_enumerate(const PolytopeH& poly);

/// A finite list of measures whose convex hull is the ambiguity set (members
/// of a FiniteSet, vertices otherwise). Wasserstein balls need a metric ground
/// cost (triangle inequality) for this.
std::vector<FiniteDistribution> generating_measures(const AmbiguitySpec& spec);

} // namespace drsoc
