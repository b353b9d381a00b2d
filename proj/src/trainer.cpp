#include "osa/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "osa/errors.hpp"
#include "osa/rng.hpp"

namespace osa {

std::string to_string(WeightMode m) {
    switch (m) {
        case WeightMode::None: return "none";
        case WeightMode::Osa: return "osa";
        case WeightMode::OracleLabels: return "oracle";
    }
    return "none";
}

WeightMode weight_mode_from_string(const std::string& name) {
    if (name == "none") return WeightMode::None;
    if (name == "osa") return WeightMode::Osa;
    if (name == "oracle" || name == "oracle-labels") return WeightMode::OracleLabels;
    throw ConfigInvalidError("unknown weight mode: " + name);
}

void TrainConfig::validate() const {
    if (epochs < 0) throw ConfigInvalidError("epochs must be >= 0");
    if (batch_size < 2) throw ConfigInvalidError("batch_size must be >= 2");
    if (!(learning_rate > 0.0) || !std::isfinite(learning_rate))
        throw ConfigInvalidError("learning_rate must be positive and finite");
    if (!(temperature > 0.0)) throw ConfigInvalidError("temperature must be > 0");
    if (emb_dim < 1) throw ConfigInvalidError("emb_dim must be >= 1");
    for (std::size_t h : hidden_widths)
        if (h < 1) throw ConfigInvalidError("hidden widths must be >= 1");
    if (fixed_beta && !(std::fabs(*fixed_beta) <= 1.0))
        throw ConfigInvalidError("fixed_beta must lie in [-1, 1]");
}

namespace {

// A (r x k) times B^T where B is (c x k): contiguous inner loops both sides.
MatD matmul_nt(const MatD& a, const MatD& b) {
    MatD out(a.rows, b.rows);
    for (std::size_t i = 0; i < a.rows; ++i) {
        const auto ar = a.row(i);
        for (std::size_t j = 0; j < b.rows; ++j) {
            const auto br = b.row(j);
            double acc = 0.0;
            for (std::size_t k = 0; k < a.cols; ++k) acc += ar[k] * br[k];
            out(i, j) = acc;
        }
    }
    return out;
}

// A (r x k) times B (k x c).
MatD matmul_nn(const MatD& a, const MatD& b) {
    MatD out(a.rows, b.cols, 0.0);
    for (std::size_t i = 0; i < a.rows; ++i) {
        const auto ar = a.row(i);
        auto orow = out.row(i);
        for (std::size_t k = 0; k < a.cols; ++k) {
            const double v = ar[k];
            const auto brow = b.row(k);
            for (std::size_t j = 0; j < b.cols; ++j) orow[j] += v * brow[j];
        }
    }
    return out;
}

// A^T (k x r -> r x k view) times B (k x c): out = A^T B.
MatD matmul_tn(const MatD& a, const MatD& b) {
    MatD out(a.cols, b.cols, 0.0);
    for (std::size_t k = 0; k < a.rows; ++k) {
        const auto ar = a.row(k);
        const auto br = b.row(k);
        for (std::size_t i = 0; i < a.cols; ++i) {
            const double v = ar[i];
            auto orow = out.row(i);
            for (std::size_t j = 0; j < b.cols; ++j) orow[j] += v * br[j];
        }
    }
    return out;
}

MatD transpose(const MatD& a) {
    MatD out(a.cols, a.rows);
    for (std::size_t i = 0; i < a.rows; ++i)
        for (std::size_t j = 0; j < a.cols; ++j) out(j, i) = a(i, j);
    return out;
}

}  // namespace

ContrastiveResult contrastive_loss(const MatD& m, double tau,
                                   std::span<const double> row_weights) {
    if (m.rows != m.cols) throw ShapeMismatchError("contrastive_loss: matrix must be square");
    if (!(tau > 0.0)) throw ConfigInvalidError("contrastive_loss: tau must be > 0");
    const std::size_t b = m.rows;
    if (!row_weights.empty() && row_weights.size() != b)
        throw ShapeMismatchError("contrastive_loss: weights length != batch size");
    for (double w : row_weights)
        if (!(w >= 0.0 && w <= 1.0))
            throw BadParamsError("contrastive_loss: weights must lie in [0, 1]");

    ContrastiveResult res;
    res.grad = MatD(b, b, 0.0);
    if (b == 0) return res;

    std::vector<double> p(b);
    double total = 0.0;
    for (std::size_t i = 0; i < b; ++i) {
        const double w = row_weights.empty() ? 1.0 : row_weights[i];
        double hi = -std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < b; ++j) hi = std::max(hi, m(i, j) / tau);
        double denom = 0.0;
        for (std::size_t j = 0; j < b; ++j) {
            p[j] = std::exp(m(i, j) / tau - hi);
            denom += p[j];
        }
        const double log_p_ii = m(i, i) / tau - hi - std::log(denom);
        total += w * -log_p_ii;
        const double scale = w / (static_cast<double>(b) * tau);
        for (std::size_t j = 0; j < b; ++j)
            res.grad(i, j) = scale * (p[j] / denom - (i == j ? 1.0 : 0.0));
    }
    res.loss = total / static_cast<double>(b);
    return res;
}

ProjectionModel::ProjectionModel(std::size_t input_dim, std::vector<std::size_t> hidden,
                                 std::size_t emb_dim, std::uint64_t seed)
    : input_dim_(input_dim), emb_dim_(emb_dim) {
    if (input_dim < 1 || emb_dim < 1)
        throw ConfigInvalidError("ProjectionModel: dims must be >= 1");
    std::vector<std::size_t> dims;
    dims.push_back(input_dim);
    for (std::size_t h : hidden) {
        if (h < 1) throw ConfigInvalidError("ProjectionModel: hidden width must be >= 1");
        dims.push_back(h);
    }
    dims.push_back(emb_dim);
    layers_per_side_ = dims.size() - 1;

    std::size_t off = 0;
    for (int side = 0; side < 2; ++side) {
        for (std::size_t l = 0; l < layers_per_side_; ++l) {
            LayerShape s;
            s.in = dims[l];
            s.out = dims[l + 1];
            s.relu = (l + 1 < layers_per_side_);
            s.w_off = off;
            off += s.in * s.out;
            s.b_off = off;
            off += s.out;
            shapes_.push_back(s);
        }
    }
    params_.assign(off, 0.0);

    auto rng = substream(seed, "model.init");
    for (const LayerShape& s : shapes_) {
        // He scaling in front of ReLU, unit fan-in scaling for the linear head.
        const double std_dev = s.relu ? std::sqrt(2.0 / static_cast<double>(s.in))
                                      : std::sqrt(1.0 / static_cast<double>(s.in));
        std::normal_distribution<double> nd(0.0, std_dev);
        for (std::size_t i = 0; i < s.in * s.out; ++i) params_[s.w_off + i] = nd(rng);
        // biases start at zero
    }
}

const ProjectionModel::LayerShape& ProjectionModel::layer(int side, std::size_t l) const {
    return shapes_[static_cast<std::size_t>(side) * layers_per_side_ + l];
}

ProjectionModel::ForwardCache ProjectionModel::forward_cached(int side,
                                                              const MatD& input) const {
    if (side != 0 && side != 1) throw BadParamsError("forward: side must be 0 or 1");
    if (input.cols != input_dim_)
        throw ShapeMismatchError("forward: input dim != model input dim");

    ForwardCache cache;
    cache.acts.reserve(layers_per_side_ + 1);
    cache.acts.push_back(input);
    for (std::size_t l = 0; l < layers_per_side_; ++l) {
        const LayerShape& s = layer(side, l);
        const MatD& a = cache.acts.back();
        MatD z(a.rows, s.out);
        for (std::size_t i = 0; i < a.rows; ++i) {
            const auto ar = a.row(i);
            for (std::size_t j = 0; j < s.out; ++j) {
                const double* w = params_.data() + s.w_off + j * s.in;
                double acc = params_[s.b_off + j];
                for (std::size_t k = 0; k < s.in; ++k) acc += ar[k] * w[k];
                z(i, j) = (s.relu && acc < 0.0) ? 0.0 : acc;
            }
        }
        cache.acts.push_back(std::move(z));
    }

    const MatD& raw = cache.acts.back();
    cache.inv_norm.resize(raw.rows);
    cache.normed = MatD(raw.rows, raw.cols);
    for (std::size_t i = 0; i < raw.rows; ++i) {
        double nr = 0.0;
        const auto rr = raw.row(i);
        for (double v : rr) nr += v * v;
        nr = std::sqrt(nr);
        const double inv = nr > 1e-300 ? 1.0 / nr : 0.0;  // dead row stays zero
        cache.inv_norm[i] = inv;
        auto out = cache.normed.row(i);
        for (std::size_t j = 0; j < raw.cols; ++j) out[j] = rr[j] * inv;
    }
    return cache;
}

MatD ProjectionModel::embed(int side, const MatD& input) const {
    return forward_cached(side, input).normed;
}

void ProjectionModel::backward(int side, const ForwardCache& cache, const MatD& d_normed,
                               std::span<double> grad) const {
    if (grad.size() != params_.size())
        throw ShapeMismatchError("backward: grad buffer size != parameter count");
    const MatD& raw = cache.acts.back();
    if (d_normed.rows != raw.rows || d_normed.cols != raw.cols)
        throw ShapeMismatchError("backward: d_normed shape mismatch");

    // Through the row normalization: g_z = inv * (g_e - (g_e . e) e).
    MatD d(raw.rows, raw.cols);
    for (std::size_t i = 0; i < raw.rows; ++i) {
        const double inv = cache.inv_norm[i];
        const auto ge = d_normed.row(i);
        const auto e = cache.normed.row(i);
        auto out = d.row(i);
        double dot = 0.0;
        for (std::size_t j = 0; j < raw.cols; ++j) dot += ge[j] * e[j];
        for (std::size_t j = 0; j < raw.cols; ++j) out[j] = inv * (ge[j] - dot * e[j]);
    }

    for (std::size_t li = layers_per_side_; li-- > 0;) {
        const LayerShape& s = layer(side, li);
        const MatD& post = cache.acts[li + 1];
        const MatD& a = cache.acts[li];

        if (s.relu) {
            for (std::size_t i = 0; i < d.rows; ++i)
                for (std::size_t j = 0; j < d.cols; ++j)
                    if (post(i, j) <= 0.0) d(i, j) = 0.0;
        }

        // dW = d^T a, db = column sums of d, d_prev = d W.
        for (std::size_t i = 0; i < d.rows; ++i) {
            const auto dr = d.row(i);
            const auto ar = a.row(i);
            for (std::size_t j = 0; j < s.out; ++j) {
                const double dv = dr[j];
                if (dv == 0.0) continue;
                double* wg = grad.data() + s.w_off + j * s.in;
                for (std::size_t k = 0; k < s.in; ++k) wg[k] += dv * ar[k];
                grad[s.b_off + j] += dv;
            }
        }
        if (li == 0) break;
        MatD d_prev(d.rows, s.in, 0.0);
        for (std::size_t i = 0; i < d.rows; ++i) {
            const auto dr = d.row(i);
            auto pr = d_prev.row(i);
            for (std::size_t j = 0; j < s.out; ++j) {
                const double dv = dr[j];
                if (dv == 0.0) continue;
                const double* w = params_.data() + s.w_off + j * s.in;
                for (std::size_t k = 0; k < s.in; ++k) pr[k] += dv * w[k];
            }
        }
        d = std::move(d_prev);
    }
}

namespace {

MatD gather_rows(const MatF& src, std::span<const std::uint32_t> idx) {
    MatD out(idx.size(), src.cols);
    for (std::size_t i = 0; i < idx.size(); ++i) {
        const auto r = src.row(idx[i]);
        auto o = out.row(i);
        for (std::size_t j = 0; j < src.cols; ++j) o[j] = static_cast<double>(r[j]);
    }
    return out;
}

struct SymmetricLoss {
    double loss = 0.0;
    MatD grad_m;  // combined dloss/dm for the row-direction matrix
};

SymmetricLoss symmetric_loss(const MatD& m, double tau, std::span<const double> w) {
    const ContrastiveResult rows = contrastive_loss(m, tau, w);
    const ContrastiveResult cols = contrastive_loss(transpose(m), tau, w);
    SymmetricLoss out;
    out.loss = 0.5 * (rows.loss + cols.loss);
    out.grad_m = rows.grad;
    for (std::size_t i = 0; i < m.rows; ++i)
        for (std::size_t j = 0; j < m.cols; ++j)
            out.grad_m(i, j) = 0.5 * (rows.grad(i, j) + cols.grad(j, i));
    return out;
}

double batch_loss_only(const ProjectionModel& model, const MatD& xb, const MatD& yb,
                       double tau, std::span<const double> w) {
    const MatD ex = model.embed(0, xb);
    const MatD ey = model.embed(1, yb);
    const MatD m = matmul_nt(ex, ey);
    const ContrastiveResult rows = contrastive_loss(m, tau, w);
    const ContrastiveResult cols = contrastive_loss(transpose(m), tau, w);
    return 0.5 * (rows.loss + cols.loss);
}

std::vector<double> resolve_weights(const PairDataset& ds, const TrainConfig& cfg,
                                    double& beta_used,
                                    std::optional<DebiasEstimate>& debias_out) {
    switch (cfg.weight_mode) {
        case WeightMode::None: return std::vector<double>(ds.n, 1.0);
        case WeightMode::OracleLabels: {
            if (!ds.has_labels())
                throw MissingLabelsError("train: oracle weight mode requires labels");
            std::vector<double> w(ds.n);
            for (std::size_t i = 0; i < ds.n; ++i) w[i] = ds.labels[i] == 0 ? 1.0 : 0.0;
            return w;
        }
        case WeightMode::Osa: {
            double beta;
            if (cfg.fixed_beta) {
                beta = *cfg.fixed_beta;
            } else {
                const DebiasEstimate est = estimate_beta_derangement(
                    ds, default_debias_k(ds.n), derive_seed(cfg.seed, "train.debias"));
                debias_out = est;
                beta = est.beta;
            }
            beta_used = beta;
            return score_dataset(ds, beta, cfg.variant).w;
        }
    }
    throw ConfigInvalidError("train: unknown weight mode");
}

}  // namespace

double RecallReport::at(int k, bool image_to_text) const {
    for (std::size_t i = 0; i < ks.size(); ++i)
        if (ks[i] == k) return image_to_text ? i2t[i] : t2i[i];
    throw BadParamsError("RecallReport: k not evaluated: " + std::to_string(k));
}

double RecallReport::mean_r1() const { return 0.5 * (at(1, true) + at(1, false)); }

RecallReport evaluate_retrieval(const ProjectionModel& model, const PairDataset& test,
                                std::span<const int> ks) {
    if (test.n == 0) throw EmptyTestSetError("evaluate_retrieval: empty test set");
    test.validate();
    if (test.has_labels())
        for (std::uint8_t c : test.labels)
            if (c != 0)
                throw BadParamsError("evaluate_retrieval: test set must be all clean");

    std::vector<std::uint32_t> all(test.n);
    std::iota(all.begin(), all.end(), 0u);
    const MatD ex = model.embed(0, gather_rows(test.x, all));
    const MatD ey = model.embed(1, gather_rows(test.y, all));
    const MatD s = matmul_nt(ex, ey);

    RecallReport rep;
    rep.ks.assign(ks.begin(), ks.end());
    if (rep.ks.empty()) rep.ks = {1, 5, 10};
    std::sort(rep.ks.begin(), rep.ks.end());

    auto ranks_of_partner = [&](bool rows) {
        std::vector<std::size_t> ranks(test.n);
        for (std::size_t q = 0; q < test.n; ++q) {
            const double own = s(q, q);
            std::size_t r = 1;
            for (std::size_t j = 0; j < test.n; ++j) {
                if (j == q) continue;
                const double v = rows ? s(q, j) : s(j, q);
                if (v > own || (v == own && j < q)) ++r;
            }
            ranks[q] = r;
        }
        return ranks;
    };

    for (bool rows : {true, false}) {
        const auto ranks = ranks_of_partner(rows);
        std::vector<double>& out = rows ? rep.i2t : rep.t2i;
        for (int k : rep.ks) {
            std::size_t hit = 0;
            for (std::size_t r : ranks) hit += (r <= static_cast<std::size_t>(k));
            out.push_back(100.0 * static_cast<double>(hit) / static_cast<double>(test.n));
        }
    }
    return rep;
}

TrainResult train(const PairDataset& ds, const TrainConfig& cfg, const PairDataset* test,
                  std::span<const int> eval_ks,
                  const std::function<void(const EpochMetrics&)>& on_epoch) {
    cfg.validate();
    ds.validate();

    double beta_used = 0.0;
    std::optional<DebiasEstimate> debias;
    std::vector<double> weights = resolve_weights(ds, cfg, beta_used, debias);

    TrainResult result{
        ProjectionModel(ds.d, cfg.hidden_widths, cfg.emb_dim,
                        derive_seed(cfg.seed, "train.init")),
        {}, std::move(weights), beta_used, debias};
    ProjectionModel& model = result.model;

    std::vector<double> grad(model.parameter_count(), 0.0);
    std::vector<std::uint32_t> order(ds.n);
    std::iota(order.begin(), order.end(), 0u);
    std::vector<int> default_ks = {1, 5, 10};
    const std::span<const int> ks =
        eval_ks.empty() ? std::span<const int>(default_ks) : eval_ks;

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        auto shuffle_rng = substream(cfg.seed, "train.shuffle", static_cast<std::uint64_t>(epoch));
        std::shuffle(order.begin(), order.end(), shuffle_rng);

        double loss_sum = 0.0;
        std::size_t batches = 0;
        for (std::size_t start = 0; start < ds.n; start += cfg.batch_size) {
            const std::size_t stop = std::min(ds.n, start + cfg.batch_size);
            std::vector<std::uint32_t> active;
            std::vector<double> wb;
            for (std::size_t i = start; i < stop; ++i) {
                const std::uint32_t idx = order[i];
                if (result.weights[idx] > 0.0) {
                    active.push_back(idx);
                    wb.push_back(result.weights[idx]);
                }
            }
            // A one-sample softmax has zero loss and zero gradient; skip.
            if (active.size() < 2) continue;

            const MatD xb = gather_rows(ds.x, active);
            const MatD yb = gather_rows(ds.y, active);
            const auto fx = model.forward_cached(0, xb);
            const auto fy = model.forward_cached(1, yb);
            const MatD m = matmul_nt(fx.normed, fy.normed);
            const SymmetricLoss sl = symmetric_loss(m, cfg.temperature, wb);

            const MatD d_ex = matmul_nn(sl.grad_m, fy.normed);
            const MatD d_ey = matmul_tn(sl.grad_m, fx.normed);

            std::fill(grad.begin(), grad.end(), 0.0);
            model.backward(0, fx, d_ex, grad);
            model.backward(1, fy, d_ey, grad);

            auto params = model.parameters();
            for (std::size_t p = 0; p < params.size(); ++p)
                params[p] -= cfg.learning_rate * grad[p];

            loss_sum += sl.loss;
            ++batches;
        }

        EpochMetrics em;
        em.epoch = epoch;
        em.loss = batches ? loss_sum / static_cast<double>(batches) : 0.0;
        if (test != nullptr) {
            em.recall = evaluate_retrieval(model, *test, ks);
            em.has_recall = true;
        }
        if (on_epoch) on_epoch(em);
        result.history.push_back(std::move(em));
    }
    return result;
}

double gradient_check(const ProjectionModel& model, const PairDataset& batch,
                      std::span<const double> weights, double tau, double epsilon) {
    batch.validate();
    if (!(epsilon > 0.0)) throw BadParamsError("gradient_check: epsilon must be > 0");
    if (!weights.empty() && weights.size() != batch.n)
        throw ShapeMismatchError("gradient_check: weights length != batch size");

    std::vector<std::uint32_t> all(batch.n);
    std::iota(all.begin(), all.end(), 0u);
    const MatD xb = gather_rows(batch.x, all);
    const MatD yb = gather_rows(batch.y, all);

    ProjectionModel work = model;

    // Analytic gradient.
    std::vector<double> grad(work.parameter_count(), 0.0);
    {
        const auto fx = work.forward_cached(0, xb);
        const auto fy = work.forward_cached(1, yb);
        const MatD m = matmul_nt(fx.normed, fy.normed);
        const SymmetricLoss sl = symmetric_loss(m, tau, weights);
        const MatD d_ex = matmul_nn(sl.grad_m, fy.normed);
        const MatD d_ey = matmul_tn(sl.grad_m, fx.normed);
        work.backward(0, fx, d_ex, grad);
        work.backward(1, fy, d_ey, grad);
    }

    double max_rel = 0.0;
    auto params = work.parameters();
    for (std::size_t p = 0; p < params.size(); ++p) {
        const double saved = params[p];
        params[p] = saved + epsilon;
        const double up = batch_loss_only(work, xb, yb, tau, weights);
        params[p] = saved - epsilon;
        const double down = batch_loss_only(work, xb, yb, tau, weights);
        params[p] = saved;
        const double numeric = (up - down) / (2.0 * epsilon);
        const double rel = std::fabs(grad[p] - numeric) /
                           std::max({1.0, std::fabs(grad[p]), std::fabs(numeric)});
        max_rel = std::max(max_rel, rel);
    }
    return max_rel;
}

}  // namespace osa
