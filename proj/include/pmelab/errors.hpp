#pragma once

#include <stdexcept>
#include <string>

namespace pmelab {

/// Quadrature, root finding, or time stepping failed to produce a usable
/// number. The message carries the diagnostic (interval, tolerance, ...).
class numeric_error : public std::runtime_error {
public:
    explicit numeric_error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Invalid experiment configuration or initial data (bad field values,
/// unknown keys, support touching the boundary, ...).
class config_error : public std::runtime_error {
public:
    explicit config_error(const std::string& msg) : std::runtime_error(msg) {}
};

/// The numerical support reached the sentinel nodes at the far boundary.
/// The run must be redone on a larger domain; we never reflect silently.
class resize_error : public std::runtime_error {
public:
    explicit resize_error(const std::string& msg) : std::runtime_error(msg) {}
};

/// run_to exceeded the configured step budget. The state passed in holds
/// the partial solution at the time the budget ran out.
class max_steps_error : public std::runtime_error {
public:
    explicit max_steps_error(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace pmelab
