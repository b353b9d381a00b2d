#pragma once

#include <cmath>
#include <random>
#include <span>
#include <utility>
#include <vector>

#include "osa/errors.hpp"

namespace osa {

inline void fill_gaussian(std::span<double> out, std::mt19937_64& rng) {
    std::normal_distribution<double> nd(0.0, 1.0);
    for (double& v : out) v = nd(rng);
}

inline double norm2(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

inline std::vector<double> unit_sphere_vector(std::size_t d, std::mt19937_64& rng) {
    std::vector<double> v(d);
    for (;;) {
        fill_gaussian(v, rng);
        const double n = norm2(v);
        if (n > 1e-12) {
            for (double& x : v) x /= n;
            return v;
        }
    }
}

/// Returns a unit pair (u, v) with cos(u, v) equal to `target` exactly (up to
/// rounding): v = c*u + sqrt(1-c^2)*w with w a random unit vector
/// orthogonalized against u.
inline std::pair<std::vector<double>, std::vector<double>> unit_pair_with_cosine(
    std::size_t d, double target, std::mt19937_64& rng) {
    if (d < 2) throw BadParamsError("unit_pair_with_cosine: need d >= 2");
    if (!(target > -1.0 && target < 1.0) && target != 1.0 && target != -1.0)
        throw BadParamsError("unit_pair_with_cosine: cosine must lie in [-1, 1]");

    std::vector<double> u = unit_sphere_vector(d, rng);
    if (target == 1.0) return {u, u};
    if (target == -1.0) {
        std::vector<double> v(u);
        for (double& x : v) x = -x;
        return {u, std::move(v)};
    }
    for (;;) {
        std::vector<double> w = unit_sphere_vector(d, rng);
        double dot = 0.0;
        for (std::size_t i = 0; i < d; ++i) dot += w[i] * u[i];
        for (std::size_t i = 0; i < d; ++i) w[i] -= dot * u[i];
        const double n = norm2(w);
        if (n <= 1e-9) continue;  // w was (anti)parallel to u; redraw
        const double s = std::sqrt(1.0 - target * target);
        std::vector<double> v(d);
        for (std::size_t i = 0; i < d; ++i) v[i] = target * u[i] + s * (w[i] / n);
        return {std::move(u), std::move(v)};
    }
}

}  // namespace osa
