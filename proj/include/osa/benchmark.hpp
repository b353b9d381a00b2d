#pragma once

#include <cstdint>
#include <vector>

#include "osa/debias.hpp"
#include "osa/noise.hpp"
#include "osa/trainer.hpp"

namespace osa {

/// The standard synthetic benchmark: cone-propagated sphere pairs, noise
/// injected at several ratios, then one training run per weight mode on the
/// same model/shuffle seed so only the weighting differs.
struct BenchmarkConfig {
    std::size_t n_train = 10000;
    std::size_t n_test = 1000;
    std::size_t d = 64;
    double clean_cos_mean = 0.65;
    double clean_cos_std = 0.05;
    std::size_t cone_layers = 1;
    std::vector<double> ratios = {0.0, 0.2, 0.5};
    std::vector<WeightMode> modes = {WeightMode::None, WeightMode::Osa,
                                     WeightMode::OracleLabels};
    TrainConfig train;  // seed/weight_mode fields are overridden per run
    std::uint64_t seed = 1;

    BenchmarkConfig() {
        // Plain fixed-rate SGD: a low rate with a long schedule keeps the
        // weighted runs (whose effective step is scaled by the mean weight)
        // and the unweighted runs on comparable footing.
        train.epochs = 150;
        train.batch_size = 64;
        train.learning_rate = 0.15;
        train.temperature = 0.2;
        train.hidden_widths = {64};
        train.emb_dim = 32;
        train.variant = ScoreVariant::Smoothstep;
    }

    void validate() const;
};

struct BenchmarkRun {
    double ratio = 0.0;
    WeightMode mode = WeightMode::None;
    RecallReport final_recall;
    double final_loss = 0.0;
    double beta = 0.0;               // derangement estimate on the noisy train set
    DetectionReport detection;       // zero-threshold split quality at this ratio
    RankReport rank;                 // weight-ranking quality at this ratio
    double seconds = 0.0;
};

struct BenchmarkReport {
    BenchmarkConfig config;
    DebiasEstimate debias;  // estimate on the clean train set, for reference
    std::vector<BenchmarkRun> runs;

    const BenchmarkRun& run(double ratio, WeightMode mode) const;  // throws if absent
};

BenchmarkReport run_benchmark(const BenchmarkConfig& cfg);

}  // namespace osa
