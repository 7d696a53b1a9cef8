#pragma once

#include <stdexcept>
#include <string>

namespace spinrb {

// Bad user input: malformed config files, out-of-range parameters,
// unusable datasets. CLI maps this to exit code 2.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// A decay fit could not be carried out (non-convergence, degenerate or
// insufficient data). CLI maps this to exit code 3.
class FitError : public std::runtime_error {
public:
    explicit FitError(const std::string& what) : std::runtime_error(what) {}
};

// A library invariant failed; indicates a bug, not bad input.
// CLI maps this to exit code 4.
class InternalError : public std::logic_error {
public:
    explicit InternalError(const std::string& what) : std::logic_error(what) {}
};

}  // namespace spinrb
