#pragma once

#include <stdexcept>
#include <string>

namespace rainfreq {

/// Bad user-facing input: malformed files, invalid arguments, missing keys.
class input_error : public std::runtime_error {
public:
    explicit input_error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Linear algebra or floating-point breakdowns (failed Cholesky, NaN blowups).
class numerical_error : public std::runtime_error {
public:
    explicit numerical_error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Optimizer or sampler did not reach its convergence contract.
class convergence_error : public std::runtime_error {
public:
    explicit convergence_error(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace rainfreq
