#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

namespace osa {

/// Which side of the value axis the clean component lives on. Values may be
/// similarities (clean = high) or losses (clean = low), so the caller says.
enum class CleanOrientation { HighIsClean, LowIsClean };

/// Two-component 1-D Gaussian mixture. After fitting, component 0 is the
/// clean component under the requested orientation.
struct Gmm1D {
    std::array<double, 2> weight{0.5, 0.5};
    std::array<double, 2> mean{0.0, 0.0};
    std::array<double, 2> variance{1.0, 1.0};
    int iterations_run = 0;
    double log_likelihood = 0.0;
    bool degenerate = false;  // all input values identical
};

/// EM from a k-means++-style 2-center initialization. Stops when the
/// log-likelihood improves by less than tol or max_iters is reached.
/// Requires n >= 4 finite values.
Gmm1D fit_em(std::span<const double> values, int max_iters, double tol,
             std::uint64_t seed, CleanOrientation orientation);

/// Posterior probability of the clean component, per value.
std::vector<double> posterior_clean(const Gmm1D& model, std::span<const double> values);

/// Indices whose clean-component posterior is >= threshold (in [0, 1]).
std::vector<std::size_t> select_clean(const Gmm1D& model, std::span<const double> values,
                                      double threshold);

}  // namespace osa
