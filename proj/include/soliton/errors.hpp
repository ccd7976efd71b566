#pragma once

#include <stdexcept>
#include <string>

namespace soliton {

/// Raised when a metric coefficient reaches zero or a curvature term stops being finite.
class CollapseError : public std::domain_error {
public:
    enum class Factor { Fiber, Base, Unknown };

    CollapseError(Factor which, const std::string& what)
        : std::domain_error(what), which_(which) {}

    Factor which() const noexcept { return which_; }

private:
    Factor which_;
};

/// Raised when a state component overflows or an RK stage turns non-finite.
class BlowUpError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Raised when an operation is called outside its admissible inputs.
class PreconditionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Raised when a closed-form solution is evaluated outside its interval of definition.
class OracleDomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

class LookupError : public std::out_of_range {
public:
    using std::out_of_range::out_of_range;
};

}  // namespace soliton
