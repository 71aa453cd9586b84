#include "drsoc/distribution.hpp"

#include "drsoc/errors.hpp"

#include <cmath>
#include <sstream>

namespace drsoc {

FiniteDistribution FiniteDistribution::checked(std::vector<double> weights) {
    FiniteDistribution d(std::move(weights));
    if (auto v = d.validate()) {
        throw InputError(*v);
    }
    return d;
}

FiniteDistribution FiniteDistribution::point_mass(std::size_t size, std::size_t atom) {
    std::vector<double> w(size, 0.0);
    w.at(atom) = 1.0;
    return FiniteDistribution(std::move(w));
}

FiniteDistribution FiniteDistribution::uniform(std::size_t size) {
    return FiniteDistribution(std::vector<double>(size, 1.0 / static_cast<double>(size)));
}

std::optional<std::string> FiniteDistribution::validate() const {
    if (weights_.empty()) {
        return "distribution has no atoms";
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < weights_.size(); ++i) {
        const double w = weights_[i];
        if (!std::isfinite(w) || w < 0.0) {
            std::ostringstream os;
            os << "weight " << i << " is negative or not finite (" << w << ")";
            return os.str();
        }
        sum += w;
    }
    if (std::abs(sum - 1.0) > kProbabilitySumTol) {
        std::ostringstream os;
        os.precision(17);
        os << "weights sum to " << sum << ", not 1";
        return os.str();
    }
    return std::nullopt;
}

double FiniteDistribution::expectation(std::span<const double> z) const {
    if (z.size() != weights_.size()) {
        throw InputError("expectation: dimension mismatch");
    }
    double s = 0.0;
    for (std::size_t i = 0; i < z.size(); ++i) {
        s += weights_[i] * z[i];
    }
    return s;
}

} // namespace drsoc
