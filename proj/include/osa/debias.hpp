#pragma once

#include <cstdint>
#include <string>

#include "osa/dataset.hpp"

namespace osa {

enum class DebiasMethod { Derangement, ExternalPairs };

std::string to_string(DebiasMethod m);

/// Estimated cone-space shift: the mean cosine similarity of random
/// (mismatched) pairs, subtracted downstream before scoring.
struct DebiasEstimate {
    double beta = 0.0;      // mean random-pair cosine, in [-1, 1]
    std::uint64_t k = 0;    // number of random pairs used
    double variance = 0.0;  // sample variance of those cosines
    std::uint64_t seed = 0;
    DebiasMethod method = DebiasMethod::Derangement;
};

/// Default sample count: min(10 n, 100000). Keeps the variance of the mean
/// around 1e-4 at typical dimensions without quadratic cost.
std::uint64_t default_debias_k(std::size_t n);

/// Estimates beta from k mismatched pairs (x_i, y_j), i != j, sampled with
/// replacement; fixed points are rejected and redrawn. Deterministic given
/// (ds, k, seed). Throws TooFewPairsError when n < 2.
DebiasEstimate estimate_beta_derangement(const PairDataset& ds, std::uint64_t k,
                                         std::uint64_t seed);

/// Estimates beta as the mean of the K diagonal cosines of a user-supplied
/// dataset of genuinely random pairs (embedded offline). Throws
/// TooFewPairsError when K < 2.
DebiasEstimate estimate_beta_external(const PairDataset& pairs, std::uint64_t seed);

}  // namespace osa
