#pragma once

#include <cmath>
#include <numbers>

namespace mesbo {

inline constexpr double kInvSqrt2 = 0.70710678118654752440;
inline constexpr double kInvSqrt2Pi = 0.39894228040143267794;
inline constexpr double kLogSqrt2Pi = 0.91893853320467274178;

inline double normal_pdf(double z) { return kInvSqrt2Pi * std::exp(-0.5 * z * z); }

inline double normal_cdf(double z) { return 0.5 * std::erfc(-z * kInvSqrt2); }

/// log Psi(z). Uses the asymptotic series below z = -25, where erfc
/// starts losing relative precision on its way to underflow.
inline double log_normal_cdf(double z) {
    if (z > 5.0) return std::log1p(-0.5 * std::erfc(z * kInvSqrt2));
    if (z > -25.0) return std::log(0.5 * std::erfc(-z * kInvSqrt2));
    const double w = 1.0 / (z * z);
    const double series = 1.0 + w * (-1.0 + w * (3.0 + w * (-15.0 + w * (105.0 - 945.0 * w))));
    return -0.5 * z * z - std::log(-z) - kLogSqrt2Pi + std::log(series);
}

}  // namespace mesbo
