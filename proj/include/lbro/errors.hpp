#pragma once

#include <stdexcept>
#include <string>

namespace lbro {

/// Operand sizes do not agree.
class DimensionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Input violates a documented precondition (non-finite entries, zero vector, ...).
class InvalidInput : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// An operation was requested in a state that does not allow it.
class StateError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// Iterative estimator ran out of iterations; carries the best value seen.
class ConvergenceError : public std::runtime_error {
public:
    ConvergenceError(const std::string& what, double best_estimate)
        : std::runtime_error(what), best_estimate_(best_estimate) {}

    double best_estimate() const noexcept { return best_estimate_; }

private:
    double best_estimate_;
};

}  // namespace lbro
