#include "osa/gmm.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "osa/errors.hpp"
#include "osa/rng.hpp"
#include "osa/stats.hpp"

namespace osa {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;

double log_normal_pdf(double x, double mean, double var) {
    const double diff = x - mean;
    return -0.5 * (kLog2Pi + std::log(var) + diff * diff / var);
}

void orient(Gmm1D& g, CleanOrientation orientation) {
    const bool clean_first = orientation == CleanOrientation::HighIsClean
                                 ? g.mean[0] >= g.mean[1]
                                 : g.mean[0] <= g.mean[1];
    if (!clean_first) {
        std::swap(g.weight[0], g.weight[1]);
        std::swap(g.mean[0], g.mean[1]);
        std::swap(g.variance[0], g.variance[1]);
    }
}

}  // namespace

Gmm1D fit_em(std::span<const double> values, int max_iters, double tol,
             std::uint64_t seed, CleanOrientation orientation) {
    const std::size_t n = values.size();
    if (n < 4) throw BadParamsError("fit_em: need at least 4 values");
    if (max_iters < 1) throw BadParamsError("fit_em: max_iters >= 1 required");
    if (!(tol >= 0.0)) throw BadParamsError("fit_em: tol must be >= 0");
    for (double v : values)
        if (!std::isfinite(v)) throw BadParamsError("fit_em: values must be finite");

    const auto mv = mean_and_variance(values);

    Gmm1D g;
    if (mv.variance == 0.0) {
        // Single-point data: both components sit on the value, variance at a
        // tiny absolute floor. Callers see it flagged.
        g.mean = {values[0], values[0]};
        g.variance = {1e-12, 1e-12};
        g.weight = {0.5, 0.5};
        g.degenerate = true;
        g.log_likelihood = 0.0;
        orient(g, orientation);
        return g;
    }

    const double var_floor = std::max(1e-6 * mv.variance, 1e-300);

    // k-means++ style init: first center uniform, second weighted by squared
    // distance to the first.
    auto rng = substream(seed, "gmm.init");
    std::uniform_int_distribution<std::size_t> uni(0, n - 1);
    const double c0 = values[uni(rng)];
    std::vector<double> d2(n);
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double diff = values[i] - c0;
        d2[i] = diff * diff;
        total += d2[i];
    }
    double c1 = c0;
    if (total > 0.0) {
        std::uniform_real_distribution<double> u(0.0, total);
        double target = u(rng), run = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            run += d2[i];
            if (run >= target) {
                c1 = values[i];
                break;
            }
        }
    }

    g.mean = {c0, c1};
    g.variance = {std::max(mv.variance, var_floor), std::max(mv.variance, var_floor)};
    g.weight = {0.5, 0.5};

    std::vector<double> resp0(n);
    double prev_ll = -std::numeric_limits<double>::infinity();
    for (int iter = 0; iter < max_iters; ++iter) {
        // E step (log domain).
        double ll = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double l0 = std::log(g.weight[0]) +
                              log_normal_pdf(values[i], g.mean[0], g.variance[0]);
            const double l1 = std::log(g.weight[1]) +
                              log_normal_pdf(values[i], g.mean[1], g.variance[1]);
            const double hi = std::max(l0, l1);
            const double lse = hi + std::log(std::exp(l0 - hi) + std::exp(l1 - hi));
            resp0[i] = std::exp(l0 - lse);
            ll += lse;
        }
        g.log_likelihood = ll;
        g.iterations_run = iter + 1;
        if (iter > 0 && ll - prev_ll < tol) break;
        prev_ll = ll;

        // M step.
        double r0 = 0.0, s0 = 0.0, s1 = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            r0 += resp0[i];
            s0 += resp0[i] * values[i];
            s1 += (1.0 - resp0[i]) * values[i];
        }
        const double r1 = static_cast<double>(n) - r0;
        // Keep both components alive; a dead component would divide by zero.
        const double eps = 1e-10;
        const double m0 = s0 / std::max(r0, eps);
        const double m1 = s1 / std::max(r1, eps);
        double v0 = 0.0, v1 = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double d0 = values[i] - m0;
            const double d1 = values[i] - m1;
            v0 += resp0[i] * d0 * d0;
            v1 += (1.0 - resp0[i]) * d1 * d1;
        }
        g.mean = {m0, m1};
        g.variance = {std::max(v0 / std::max(r0, eps), var_floor),
                      std::max(v1 / std::max(r1, eps), var_floor)};
        const double w0 = std::clamp(r0 / static_cast<double>(n), 1e-9, 1.0 - 1e-9);
        g.weight = {w0, 1.0 - w0};
    }

    orient(g, orientation);
    return g;
}

std::vector<double> posterior_clean(const Gmm1D& model, std::span<const double> values) {
    std::vector<double> post(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        const double l0 = std::log(model.weight[0]) +
                          log_normal_pdf(values[i], model.mean[0], model.variance[0]);
        const double l1 = std::log(model.weight[1]) +
                          log_normal_pdf(values[i], model.mean[1], model.variance[1]);
        const double hi = std::max(l0, l1);
        const double lse = hi + std::log(std::exp(l0 - hi) + std::exp(l1 - hi));
        post[i] = std::exp(l0 - lse);
    }
    return post;
}

std::vector<std::size_t> select_clean(const Gmm1D& model, std::span<const double> values,
                                      double threshold) {
    if (!(threshold >= 0.0 && threshold <= 1.0))
        throw InvalidThresholdError("select_clean: threshold must lie in [0, 1]");
    const std::vector<double> post = posterior_clean(model, values);
    std::vector<std::size_t> selected;
    for (std::size_t i = 0; i < post.size(); ++i)
        if (post[i] >= threshold) selected.push_back(i);
    return selected;
}

}  // namespace osa
