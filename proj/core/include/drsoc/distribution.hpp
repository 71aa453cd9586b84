#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace drsoc {

/// Absolute tolerance on the sum of probability weights.
inline constexpr double kProbabilitySumTol = 1e-9;

/**
 * Probability weights over atoms 0..size()-1.
 *
 * The constructor stores the weights as given; validity (nonnegative, summing
 * to one within kProbabilitySumTol) is checked by validate() so that problem
 * validation can report violations as data. Use checked() where invalid
 * weights must be rejected immediately. Weights are never renormalized.
 */
class FiniteDistribution {
public:
    FiniteDistribution() = default;
    explicit FiniteDistribution(std::vector<double> weights) : weights_(std::move(weights)) {}

    /// Throws InputError when the weights are not a probability vector.
    static FiniteDistribution checked(std::vector<double> weights);
    static FiniteDistribution point_mass(std::size_t size, std::size_t atom);
    static FiniteDistribution uniform(std::size_t size);

    /// Description of the first violated invariant, or nullopt.
    std::optional<std::string> validate() const;
    bool valid() const { return !validate().has_value(); }

    std::size_t size() const { return weights_.size(); }
    double operator[](std::size_t i) const { return weights_[i]; }
    std::span<const double> weights() const { return weights_; }

    double expectation(std::span<const double> z) const;

    bool operator==(const FiniteDistribution&) const = default;

private:
    std::vector<double> weights_;
};

} // namespace drsoc
