#pragma once

#include <cmath>
#include <cstddef>
#include <span>

namespace osa {

/// Standard normal CDF via erf; double precision, ~1e-16 relative error.
inline double normal_cdf(double z) {
    return 0.5 * std::erfc(-z / std::sqrt(2.0));
}

/// P(|Z| <= z) for standard normal Z, i.e. Phi(z) - Phi(-z).
inline double normal_central_prob(double z) {
    return std::erf(z / std::sqrt(2.0));
}

struct MomentSummary {
    std::size_t count = 0;
    double mean = 0.0;
    double variance = 0.0;      // population (biased) variance
    double skewness = 0.0;
    double excess_kurtosis = 0.0;
};

/// Central moments from raw power sums. Callers accumulate s1..s4 = sum of
/// x, x^2, x^3, x^4 (values here are O(1), so raw sums in double are fine).
inline MomentSummary moments_from_sums(std::size_t n, double s1, double s2, double s3,
                                       double s4) {
    MomentSummary out;
    out.count = n;
    if (n == 0) return out;
    const double nn = static_cast<double>(n);
    const double mu = s1 / nn;
    const double m2 = s2 / nn - mu * mu;
    const double m3 = s3 / nn - 3.0 * mu * (s2 / nn) + 2.0 * mu * mu * mu;
    const double m4 = s4 / nn - 4.0 * mu * (s3 / nn) + 6.0 * mu * mu * (s2 / nn) -
                      3.0 * mu * mu * mu * mu;
    out.mean = mu;
    out.variance = m2;
    if (m2 > 0.0) {
        out.skewness = m3 / std::pow(m2, 1.5);
        out.excess_kurtosis = m4 / (m2 * m2) - 3.0;
    }
    return out;
}

struct MeanVariance {
    double mean = 0.0;
    double variance = 0.0;  // sample variance (n-1 denominator)
};

/// Welford single-pass mean / sample variance.
inline MeanVariance mean_and_variance(std::span<const double> xs) {
    double mean = 0.0, m2 = 0.0;
    std::size_t k = 0;
    for (double x : xs) {
        ++k;
        const double delta = x - mean;
        mean += delta / static_cast<double>(k);
        m2 += delta * (x - mean);
    }
    MeanVariance out;
    out.mean = mean;
    out.variance = (k > 1) ? m2 / static_cast<double>(k - 1) : 0.0;
    return out;
}

}  // namespace osa
