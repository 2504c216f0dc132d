#pragma once

#include <stdexcept>
#include <string>

namespace mclab {

// Caller handed us arguments that violate an operation's precondition.
class PreconditionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// A construction would exceed the configured cell budget.
class CapacityError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Something that the mathematics guarantees did not happen. Signals an
// implementation or sampling defect, never bad user input.
class InvariantError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

inline void require(bool cond, const std::string& what) {
    if (!cond) throw PreconditionError(what);
}

inline void ensure(bool cond, const std::string& what) {
    if (!cond) throw InvariantError(what);
}

}  // namespace mclab
