#pragma once

#include <stdexcept>
#include <string>

namespace gsoid {

/// Dimension or argument contract violated by the caller.
class InvalidArgument : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Input is well-formed but numerically degenerate (all-zero matrix, empty support, ...).
class DegenerateInput : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Simulated process blew up; `time_index` is the 1-based step that tripped the guard.
class InstabilityError : public std::runtime_error {
public:
    InstabilityError(const std::string& what, long time_index)
        : std::runtime_error(what), time_index_(time_index) {}

    long time_index() const noexcept { return time_index_; }

private:
    long time_index_;
};

/// Malformed or inconsistent experiment configuration / CLI input.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace gsoid
