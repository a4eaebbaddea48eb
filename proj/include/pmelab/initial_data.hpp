#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <variant>
#include <vector>

#include "pmelab/barenblatt.hpp"
#include "pmelab/dipole.hpp"
#include "pmelab/errors.hpp"

namespace pmelab {

/// Constant height on [x1, x2].
struct BoxData {
    double height;
    double x1, x2;
    bool operator==(const BoxData&) const = default;
};

/// Triangular bump peaking mid-interval.
struct HatData {
    double peak;
    double x1, x2;
    bool operator==(const HatData&) const = default;
};

/// Piecewise-linear samples; zero outside the sampled range.
struct SampleData {
    std::vector<double> x;
    std::vector<double> u;
    bool operator==(const SampleData&) const = default;
};

/// Exact dipole D_M(., t0); the self-test datum.
struct DipoleData {
    double M;
    double t0;
    bool operator==(const DipoleData&) const = default;
};

/// Interior Barenblatt translate B(. - x0, t0; C).
struct BarenblattData {
    double C;
    double x0;
    double t0;
    bool operator==(const BarenblattData&) const = default;
};

using InitialData =
    std::variant<BoxData, HatData, SampleData, DipoleData, BarenblattData>;

inline void validate_initial_data(const InitialData& data) {
    std::visit(
        [](const auto& d) {
            using T = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<T, BoxData>) {
                if (!(d.height > 0.0))
                    throw std::invalid_argument("box: height must be positive");
                if (!(d.x2 > d.x1) || !(d.x1 >= 0.0))
                    throw std::invalid_argument("box: need 0 <= x1 < x2");
            } else if constexpr (std::is_same_v<T, HatData>) {
                if (!(d.peak > 0.0))
                    throw std::invalid_argument("hat: peak must be positive");
                if (!(d.x2 > d.x1) || !(d.x1 >= 0.0))
                    throw std::invalid_argument("hat: need 0 <= x1 < x2");
            } else if constexpr (std::is_same_v<T, SampleData>) {
                if (d.x.size() != d.u.size() || d.x.size() < 2)
                    throw std::invalid_argument("samples: need matching x/u, >= 2 points");
                if (!std::is_sorted(d.x.begin(), d.x.end()))
                    throw std::invalid_argument("samples: x must be increasing");
                if (d.x.front() < 0.0)
                    throw std::invalid_argument("samples: x must be >= 0");
                for (double v : d.u)
                    if (v < 0.0 || !std::isfinite(v))
                        throw std::invalid_argument(
                            "samples: values must be finite and nonnegative");
            } else if constexpr (std::is_same_v<T, DipoleData>) {
                if (!(d.M > 0.0))
                    throw std::invalid_argument("dipole: M must be positive");
                if (!(d.t0 > 0.0))
                    throw std::invalid_argument("dipole: t0 must be positive");
            } else if constexpr (std::is_same_v<T, BarenblattData>) {
                if (!(d.C > 0.0))
                    throw std::invalid_argument("barenblatt: C must be positive");
                if (!(d.x0 > 0.0))
                    throw std::invalid_argument("barenblatt: x0 must be positive");
                if (!(d.t0 > 0.0))
                    throw std::invalid_argument("barenblatt: t0 must be positive");
            }
        },
        data);
}

/// Intrinsic start time of self-similar data, 0 for profile-free data.
inline double initial_time(const InitialData& data) {
    if (const auto* d = std::get_if<DipoleData>(&data)) return d->t0;
    if (const auto* b = std::get_if<BarenblattData>(&data)) return b->t0;
    return 0.0;
}

/// Exact first moment of the continuum initial data. Needs the medium
/// exponent only for the self-similar variants.
inline double initial_moment(const InitialData& data, double m) {
    return std::visit(
        [m](const auto& d) -> double {
            using T = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<T, BoxData>) {
                return 0.5 * d.height * (d.x2 * d.x2 - d.x1 * d.x1);
            } else if constexpr (std::is_same_v<T, HatData>) {
                // symmetric triangle: centroid at the midpoint
                return 0.5 * d.peak * (d.x2 - d.x1) * 0.5 * (d.x1 + d.x2);
            } else if constexpr (std::is_same_v<T, SampleData>) {
                double acc = 0.0;
                for (std::size_t i = 0; i + 1 < d.x.size(); ++i)
                    acc += 0.5 * (d.x[i] * d.u[i] + d.x[i + 1] * d.u[i + 1]) *
                           (d.x[i + 1] - d.x[i]);
                return acc;
            } else if constexpr (std::is_same_v<T, DipoleData>) {
                return d.M;
            } else {
                const auto b = make_barenblatt(m, d.C, d.x0);
                return d.x0 * barenblatt_mass(b, d.t0);
            }
        },
        data);
}

/// Rightmost point of the support.
inline double initial_support_max(const InitialData& data, double m) {
    return std::visit(
        [m](const auto& d) -> double {
            using T = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<T, BoxData> || std::is_same_v<T, HatData>) {
                return d.x2;
            } else if constexpr (std::is_same_v<T, SampleData>) {
                return d.x.back();
            } else if constexpr (std::is_same_v<T, DipoleData>) {
                const auto p = build_profile(m, d.M);
                return p.xi_M * std::pow(d.t0, p.exponents.beta);
            } else {
                const auto b = make_barenblatt(m, d.C, d.x0);
                return d.x0 + barenblatt_support_radius(b, d.t0);
            }
        },
        data);
}

}  // namespace pmelab
