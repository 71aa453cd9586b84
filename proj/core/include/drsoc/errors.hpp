#pragma once

#include <stdexcept>
#include <string>

namespace drsoc {

/// Malformed or inconsistent input. The CLI maps this to exit code 2.
class InputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Numerical failure (LP iteration limit, unexpected infeasibility). Exit code 3.
class SolverError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace drsoc
