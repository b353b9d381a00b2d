#include "osa/scoring.hpp"

#include <algorithm>

#include "osa/errors.hpp"

namespace osa {

std::string to_string(ScoreVariant v) {
    switch (v) {
        case ScoreVariant::PaperCubic: return "paper-cubic";
        case ScoreVariant::Smoothstep: return "smoothstep";
        case ScoreVariant::HardThreshold: return "hard-threshold";
    }
    return "paper-cubic";
}

ScoreVariant score_variant_from_string(const std::string& name) {
    if (name == "paper-cubic") return ScoreVariant::PaperCubic;
    if (name == "smoothstep") return ScoreVariant::Smoothstep;
    if (name == "hard-threshold" || name == "hard") return ScoreVariant::HardThreshold;
    throw BadParamsError("unknown score variant: " + name);
}

double score_one(double s, double beta, ScoreVariant variant) {
    const double t = s - beta;
    if (t <= 0.0) return 0.0;
    double w = 0.0;
    switch (variant) {
        case ScoreVariant::PaperCubic: w = -t * t * (t - 1.0); break;
        case ScoreVariant::Smoothstep: w = 3.0 * t * t - 2.0 * t * t * t; break;
        case ScoreVariant::HardThreshold: return 1.0;
    }
    return std::clamp(w, 0.0, 1.0);
}

WeightVector score_dataset(const PairDataset& ds, double beta, ScoreVariant variant) {
    const PairSimilarities sims = pair_similarities(ds);
    WeightVector out;
    out.beta_used = beta;
    out.variant = variant;
    out.degenerate_pairs = sims.degenerate.size();
    out.w.resize(ds.n);
    for (std::size_t i = 0; i < ds.n; ++i) out.w[i] = score_one(sims.s[i], beta, variant);
    // A zero embedding carries no evidence of cleanliness.
    for (std::uint32_t i : sims.degenerate) out.w[i] = 0.0;
    return out;
}

WeightVector score_dataset(const PairDataset& ds, const DebiasEstimate& est,
                           ScoreVariant variant) {
    return score_dataset(ds, est.beta, variant);
}

}  // namespace osa
