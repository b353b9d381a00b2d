#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "osa/dataset.hpp"
#include "osa/debias.hpp"
#include "osa/mat.hpp"
#include "osa/scoring.hpp"

namespace osa {

enum class WeightMode { None, Osa, OracleLabels };

std::string to_string(WeightMode m);
WeightMode weight_mode_from_string(const std::string& name);

struct TrainConfig {
    int epochs = 10;
    std::size_t batch_size = 256;
    double learning_rate = 0.05;
    double temperature = 0.07;  // logits are m / temperature
    std::uint64_t seed = 0;
    std::vector<std::size_t> hidden_widths = {64};
    std::size_t emb_dim = 32;
    WeightMode weight_mode = WeightMode::None;
    ScoreVariant variant = ScoreVariant::PaperCubic;
    /// When set, OSA weights use this space shift instead of estimating one.
    std::optional<double> fixed_beta;

    void validate() const;  // throws ConfigInvalidError
};

struct ContrastiveResult {
    double loss = 0.0;
    MatD grad;  // dloss/dm, same shape as m
};

/// Row-direction weighted InfoNCE over a b x b similarity matrix:
/// loss = (1/b) sum_i w_i * -log softmax(m_i / tau)_i, with the max
/// subtracted before exponentiation. Empty weights mean all ones.
ContrastiveResult contrastive_loss(const MatD& m, double tau,
                                   std::span<const double> row_weights = {});

/// Two feed-forward encoders (one per view) with ReLU hidden layers, a
/// linear final layer, and unit-normalized outputs. All parameters live in
/// one flat double vector; training math runs in double end to end.
class ProjectionModel {
public:
    ProjectionModel(std::size_t input_dim, std::vector<std::size_t> hidden_widths,
                    std::size_t emb_dim, std::uint64_t seed);

    std::size_t input_dim() const { return input_dim_; }
    std::size_t emb_dim() const { return emb_dim_; }
    std::size_t parameter_count() const { return params_.size(); }
    std::span<double> parameters() { return params_; }
    std::span<const double> parameters() const { return params_; }

    /// Embeds a batch of rows with encoder `side` (0 = x view, 1 = y view).
    /// Output rows have unit norm (a fully dead batch row stays zero).
    MatD embed(int side, const MatD& input) const;

    struct ForwardCache {
        std::vector<MatD> acts;        // acts[0] = input, then per-layer outputs
        std::vector<double> inv_norm;  // 1/|row| of the final raw output (0 for dead rows)
        MatD normed;
    };
    ForwardCache forward_cached(int side, const MatD& input) const;

    /// Accumulates dloss/dparams into grad given dloss/dnormed for one side.
    void backward(int side, const ForwardCache& cache, const MatD& d_normed,
                  std::span<double> grad) const;

private:
    struct LayerShape {
        std::size_t in = 0, out = 0;
        std::size_t w_off = 0, b_off = 0;
        bool relu = false;
    };
    const LayerShape& layer(int side, std::size_t l) const;

    std::size_t input_dim_ = 0;
    std::size_t emb_dim_ = 0;
    std::vector<LayerShape> shapes_;  // per side, concatenated
    std::size_t layers_per_side_ = 0;
    std::vector<double> params_;
};

struct RecallReport {
    std::vector<int> ks;
    std::vector<double> i2t;  // percentage per k
    std::vector<double> t2i;

    double at(int k, bool image_to_text) const;  // throws BadParamsError if k missing
    double mean_r1() const;                      // (i2t R@1 + t2i R@1) / 2
};

/// Ranks every y by similarity for each query x (and vice versa); ties break
/// by ascending index. Requires a clean test set.
RecallReport evaluate_retrieval(const ProjectionModel& model, const PairDataset& test,
                                std::span<const int> ks);

struct EpochMetrics {
    int epoch = 0;
    double loss = 0.0;
    bool has_recall = false;
    RecallReport recall;
};

struct TrainResult {
    ProjectionModel model;
    std::vector<EpochMetrics> history;
    std::vector<double> weights;  // per-sample weights actually used
    double beta_used = 0.0;       // 0 unless weight_mode = osa
    std::optional<DebiasEstimate> debias;
};

/// Minibatch SGD on the symmetric (rows + columns, averaged) weighted
/// contrastive loss. Weights are computed once from the raw input embeddings
/// before training; zero-weight samples are excluded from their batches, so
/// they touch no update. Deterministic given (ds, cfg). on_epoch, when set,
/// fires after each epoch's metrics are final.
TrainResult train(const PairDataset& ds, const TrainConfig& cfg,
                  const PairDataset* test = nullptr, std::span<const int> eval_ks = {},
                  const std::function<void(const EpochMetrics&)>& on_epoch = {});

/// Max relative error between analytic parameter gradients of the symmetric
/// weighted loss and central finite differences with step epsilon.
double gradient_check(const ProjectionModel& model, const PairDataset& batch,
                      std::span<const double> weights, double tau, double epsilon);

}  // namespace osa
