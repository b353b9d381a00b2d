#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "osa/dataset.hpp"
#include "osa/random_network.hpp"
#include "osa/scoring.hpp"

namespace osa {

struct NoiseInjectionReport {
    double ratio_requested = 0.0;
    std::size_t count_corrupted = 0;
    std::uint64_t permutation_seed = 0;
    std::vector<std::uint32_t> indices_corrupted;  // sorted ascending
};

/// Corrupts a uniformly random subset of round(ratio*n) pairs by deranging
/// their y rows within the subset; labels are set to 1 there and 0 elsewhere.
/// Throws SubsetTooSmallError when 0 < round(ratio*n) < 2 (no derangement on
/// one element).
std::pair<PairDataset, NoiseInjectionReport> inject_noise(const PairDataset& ds,
                                                          double ratio,
                                                          std::uint64_t seed);

/// Synthetic paired dataset: x rows uniform on the unit sphere, y_i built so
/// cos(x_i, y_i) ~ Normal(clean_cos_mean, clean_cos_std^2) truncated to
/// (-1, 1). When `cone` is given, both sides are propagated through the same
/// random network and re-normalized, which produces a realistic positive
/// space shift.
PairDataset synth_dataset(std::size_t n, std::size_t d, double clean_cos_mean,
                          double clean_cos_std, std::uint64_t seed,
                          const std::optional<RandomNetworkSpec>& cone = std::nullopt);

struct DetectionReport {
    double threshold = 0.0;     // applied to debiased scores t = s - beta
    double accuracy = 0.0;      // % of true-clean pairs classified clean
    double recall = 0.0;        // % of true-noisy pairs classified noisy
    std::size_t clean_as_clean = 0;
    std::size_t clean_as_noisy = 0;
    std::size_t noisy_as_noisy = 0;
    std::size_t noisy_as_clean = 0;
};

/// Classifies pair i as noise iff debiased[i] <= threshold and scores the
/// split against ground-truth labels (0 = clean, 1 = noisy).
DetectionReport detect(std::span<const double> debiased,
                       std::span<const std::uint8_t> labels, double threshold = 0.0);

struct RankReport {
    double mean_noise_rank = 0.0;
    double optimal_rank = 0.0;
    std::size_t n = 0;  // total samples
    std::size_t m = 0;  // noisy samples
};

/// Best achievable mean noise rank: noisy samples occupy the last m ranks.
double optimal_rank(std::size_t n, std::size_t m);

/// Ranks samples 1..n by descending weight (ties broken by ascending index)
/// and averages the ranks of the noisy ones.
RankReport mean_noise_rank(std::span<const double> weights,
                           std::span<const std::uint8_t> labels);

RankReport mean_noise_rank(const WeightVector& weights,
                           std::span<const std::uint8_t> labels);

}  // namespace osa
