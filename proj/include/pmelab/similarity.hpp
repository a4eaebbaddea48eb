#pragma once

#include <stdexcept>

namespace pmelab {

/// Similarity exponents of the half-line dipole scaling u ~ t^{-alpha} F(x/t^beta).
///
/// alpha = 1/m and beta = 1/(2m); this pair keeps the first moment of the
/// solution constant in time. They satisfy m*alpha + 2*beta = alpha + 1.
struct SimilarityExponents {
    double m;
    double alpha;
    double beta;

    /// Exponent of the weighted near-field error, alpha + beta/m = (2m+1)/(2m^2).
    double near_field() const { return alpha + beta / m; }

    bool operator==(const SimilarityExponents&) const = default;
};

inline SimilarityExponents similarity_exponents(double m) {
    if (!(m > 1.0))
        throw std::invalid_argument("similarity_exponents: m must exceed 1");
    return {m, 1.0 / m, 1.0 / (2.0 * m)};
}

}  // namespace pmelab
