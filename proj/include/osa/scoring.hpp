#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "osa/dataset.hpp"
#include "osa/debias.hpp"

namespace osa {

// Scoring curve applied to t = s - beta. PaperCubic is -t^2 (t - 1) clamped
// to [0,1]; it peaks at 4/27 at t = 2/3 and returns to 0 at t = 1. Smoothstep
// (3t^2 - 2t^3) keeps the zero-on-negative behaviour and the fast-rising
// gradient near 0 while reaching 1. HardThreshold is the 0/1 step.
enum class ScoreVariant { PaperCubic, Smoothstep, HardThreshold };

std::string to_string(ScoreVariant v);
ScoreVariant score_variant_from_string(const std::string& name);

double score_one(double s, double beta, ScoreVariant variant);

/// Per-pair cleanliness weights in [0, 1].
struct WeightVector {
    std::vector<double> w;
    double beta_used = 0.0;
    ScoreVariant variant = ScoreVariant::PaperCubic;
    std::size_t degenerate_pairs = 0;  // zero-vector pairs, forced to weight 0
};

WeightVector score_dataset(const PairDataset& ds, double beta, ScoreVariant variant);
WeightVector score_dataset(const PairDataset& ds, const DebiasEstimate& est,
                           ScoreVariant variant);

}  // namespace osa
