#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "osa/random_network.hpp"

namespace osa {

/// P(|cos(u,v)| <= a) for random vectors in R^d, using cos(u,v) ~ N(0, 1/d):
/// Phi(a*sqrt(d)) - Phi(-a*sqrt(d)).
double ortho_prob_analytic(std::size_t d, double a);

/// Empirical counterpart: fraction of i.i.d. standard-Gaussian vector pairs
/// with |cos| <= a. Per-trial RNG substreams keep the result identical for
/// any thread count. Requires trials >= 1000.
double ortho_prob_montecarlo(std::size_t d, double a, std::size_t trials,
                             std::uint64_t seed, int threads = 1);

/// The clean / random / noisy input pairs tracked through a network.
struct PairTriple {
    std::vector<double> clean_u, clean_v;  // cos > 0
    std::vector<double> rand_u, rand_v;    // cos ~ 0
    std::vector<double> noisy_u, noisy_v;  // cos < 0
};

PairTriple make_triple(std::size_t d, double clean_cos, double random_cos,
                       double noisy_cos, std::mt19937_64& rng);

/// Per-depth cosine trajectories. Index 0 holds the input-space values, then
/// one entry per layer; beta[i] is the mean cosine of the random-pair pool at
/// depth i (the moving orthogonal boundary).
struct PropagationTrace {
    std::vector<double> clean, random, noisy;
    std::vector<double> beta;
    std::size_t pool_pairs = 0;
};

PropagationTrace propagate(const RandomNetworkSpec& spec, const PairTriple& triple,
                           std::size_t beta_pool_pairs = 1000,
                           std::uint64_t pool_seed = 0);

struct ConeSimulationConfig {
    std::size_t layers = 5;
    std::size_t width = 512;
    std::size_t trials = 1000;
    double clean_cos = 0.3;
    double noisy_cos = -0.3;
    std::size_t pool_pairs_per_trial = 16;
    std::uint64_t seed = 0;
    int threads = 1;
};

struct ConeSimulationResult {
    std::size_t trials = 0;
    /// Fraction of trials keeping clean > random > noisy at the output layer.
    double ordering_preserved_rate = 0.0;
    /// Per-depth means over all trials (length layers + 1).
    std::vector<double> mean_beta, mean_clean, mean_random, mean_noisy;
};

/// Repeated propagation through fresh random networks: one network, one
/// triple and one random-pair pool per trial, all from per-trial substreams.
ConeSimulationResult simulate_cone(const ConeSimulationConfig& cfg);

enum class InputDistribution { Uniform, Gaussian };

struct GaussianityReport {
    std::size_t samples = 0;
    /// Per output coordinate, across samples.
    std::vector<double> mean, variance, skewness, excess_kurtosis;
    double max_abs_skewness = 0.0;
    double max_abs_excess_kurtosis = 0.0;
    double mean_empirical_variance = 0.0;
    /// Variance pooled over every coordinate and sample. The closed form
    /// below averages over the weight draw as well, which one realized
    /// network only reproduces across coordinates, so this is the matching
    /// empirical quantity.
    double pooled_variance = 0.0;
    /// d_in^t * sigma_w^2 * (sigma_x^2 + mu_x^2) + sigma_b^2 with the final
    /// layer's input statistics measured from the sample stream.
    double theoretical_variance = 0.0;
};

/// Propagates `samples` inputs through the network (final layer must be
/// linear) and summarizes the per-coordinate output moments.
GaussianityReport gaussianity_report(const RandomNetworkSpec& spec, InputDistribution dist,
                                     std::size_t samples, std::uint64_t seed,
                                     int threads = 1);

}  // namespace osa
