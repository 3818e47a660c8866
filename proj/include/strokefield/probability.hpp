#pragma once

// Potential-to-probability conversion and weighting. P = |V_m| / 2*pi;
// values above 1 are either lone numerical spikes (median-repaired) or
// genuine double-coverage (clamped). The smoothstep weight sharpens the
// mid-range while preserving the endpoint, monotonicity and antisymmetry
// requirements of a valid probability reweighting.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "em_field.hpp"
#include "raster.hpp"

namespace strokefield {

/// Diagnostic boundary between numerical spikes and genuine double
/// coverage; reported, not branched on.
inline constexpr double kNumericOvershootCeiling = 1.10;

struct ProbabilityField {
    enum class Kind { Raw, Sanitized, Weighted, Combined };
    Raster<double> values;
    Kind kind = Kind::Raw;
};

inline ProbabilityField potential_to_probability(const PotentialField& field) {
    ProbabilityField out;
    out.kind = ProbabilityField::Kind::Raw;
    out.values = Raster<double>(field.values.width(), field.values.height());
    for (std::size_t i = 0; i < field.values.size(); ++i)
        out.values.data()[i] = std::abs(field.values.data()[i]) / kTwoPi;
    return out;
}

struct SanitizeStats {
    int over_one = 0;       // raw values above 1
    int over_ceiling = 0;   // raw values above the numerical-error ceiling
    int median_repaired = 0;
    int clamped = 0;
};

/// Median-repairs isolated overshoots (a >1 pixel whose 3x3 median is
/// valid), then clamps whatever remains into [0, 1].
inline ProbabilityField sanitize(const ProbabilityField& raw, SanitizeStats* stats = nullptr) {
    const auto& v = raw.values;
    const int w = v.width(), h = v.height();
    ProbabilityField out;
    out.kind = ProbabilityField::Kind::Sanitized;
    out.values = v;
    SanitizeStats local;
    double window[9];
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const double p = v.at(x, y);
            if (p <= 1.0) continue;
            ++local.over_one;
            if (p > kNumericOvershootCeiling) ++local.over_ceiling;
            int n = 0;
            for (int dy = -1; dy <= 1; ++dy)
                for (int dx = -1; dx <= 1; ++dx) {
                    if (!v.in_bounds(x + dx, y + dy)) continue;
                    window[n++] = v.at(x + dx, y + dy);
                }
            std::sort(window, window + n);
            const double med = n % 2 ? window[n / 2] : 0.5 * (window[n / 2 - 1] + window[n / 2]);
            if (med <= 1.0) {
                out.values.at(x, y) = med;
                ++local.median_repaired;
            }
        }
    for (double& p : out.values.data()) {
        if (p > 1.0) {
            p = 1.0;
            ++local.clamped;
        } else if (p < 0.0) {
            p = 0.0;
        }
    }
    if (stats) *stats = local;
    return out;
}

namespace detail {

inline double binomial(int n, int k) {
    if (k < 0 || k > n) return 0.0;
    double r = 1.0;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

}  // namespace detail

/// Polynomial coefficients of the order-K smoothstep in powers
/// p^(K+1) ... p^(2K+1); exact integers for small K.
inline std::vector<double> smoothstep_coefficients(int order) {
    if (order < 0) throw std::invalid_argument("smoothstep: order must be >= 0");
    std::vector<double> coeffs;
    for (int k = 0; k <= order; ++k) {
        const double c = detail::binomial(order + k, k) * detail::binomial(2 * order + 1, order - k);
        coeffs.push_back(k % 2 ? -c : c);
    }
    return coeffs;
}

/// Hermite smoothstep weight of order K; K = 0 is the identity.
inline double smoothstep_weight(double p, int order) {
    if (order < 0) throw std::invalid_argument("smoothstep: order must be >= 0");
    if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("smoothstep: p outside [0, 1]; sanitize first");
    double acc = 0.0;
    double pk = 1.0;
    const auto coeffs = smoothstep_coefficients(order);
    for (int k = 0; k <= order; ++k) {
        acc += coeffs[static_cast<std::size_t>(k)] * pk;
        pk *= p;
    }
    return std::pow(p, order + 1) * acc;
}

inline ProbabilityField smoothstep_weight(const ProbabilityField& p, int order) {
    ProbabilityField out;
    out.kind = ProbabilityField::Kind::Weighted;
    out.values = Raster<double>(p.values.width(), p.values.height());
    for (std::size_t i = 0; i < p.values.size(); ++i)
        out.values.data()[i] = smoothstep_weight(p.values.data()[i], order);
    return out;
}

/// Pointwise maximum over the sub-image weights: the best case of belonging
/// to any sub-image. Deliberately not a consistent probability by itself;
/// the per-sub-image fields stay available.
inline ProbabilityField combine_subimages(const std::vector<ProbabilityField>& weights) {
    if (weights.empty()) throw std::invalid_argument("combine_subimages: empty list");
    ProbabilityField out;
    out.kind = ProbabilityField::Kind::Combined;
    out.values = weights.front().values;
    for (std::size_t k = 1; k < weights.size(); ++k) {
        if (!weights[k].values.same_shape(out.values))
            throw std::invalid_argument("combine_subimages: mismatched dimensions");
        for (std::size_t i = 0; i < out.values.size(); ++i)
            out.values.data()[i] = std::max(out.values.data()[i], weights[k].values.data()[i]);
    }
    return out;
}

}  // namespace strokefield
