#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>

namespace pmelab {

/// Uniform half-line grid with nodes x_i = i * dx, i = 0 .. n-1.
struct Grid1D {
    double dx;
    std::size_t n;

    double length() const { return dx * static_cast<double>(n - 1); }
    double x(std::size_t i) const { return dx * static_cast<double>(i); }

    bool operator==(const Grid1D&) const = default;
};

inline Grid1D make_grid(double dx, std::size_t n) {
    if (!(dx > 0.0)) throw std::invalid_argument("make_grid: dx must be positive");
    if (n < 3) throw std::invalid_argument("make_grid: need at least 3 nodes");
    return {dx, n};
}

/// Smallest grid of pitch dx covering [0, length].
inline Grid1D grid_covering(double dx, double length) {
    if (!(length > 0.0))
        throw std::invalid_argument("grid_covering: length must be positive");
    const auto n = static_cast<std::size_t>(std::ceil(length / dx)) + 1;
    return make_grid(dx, n < 3 ? 3 : n);
}

}  // namespace pmelab
