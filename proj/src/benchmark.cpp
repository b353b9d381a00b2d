#include "osa/benchmark.hpp"

#include <chrono>
#include <cmath>

#include "osa/errors.hpp"
#include "osa/rng.hpp"

namespace osa {

void BenchmarkConfig::validate() const {
    if (n_train < 4 || n_test < 1) throw BadParamsError("benchmark: train/test sizes too small");
    if (d < 2) throw BadParamsError("benchmark: d >= 2 required");
    if (ratios.empty() || modes.empty())
        throw BadParamsError("benchmark: need at least one ratio and one mode");
    for (double r : ratios)
        if (!(r >= 0.0 && r <= 1.0)) throw BadParamsError("benchmark: ratio outside [0, 1]");
    train.validate();
}

const BenchmarkRun& BenchmarkReport::run(double ratio, WeightMode mode) const {
    for (const BenchmarkRun& r : runs)
        if (r.mode == mode && std::fabs(r.ratio - ratio) < 1e-12) return r;
    throw BadParamsError("benchmark report: no run for requested ratio/mode");
}

BenchmarkReport run_benchmark(const BenchmarkConfig& cfg) {
    cfg.validate();

    BenchmarkReport report;
    report.config = cfg;

    // One pool, split train/test. The cone gives the data a positive space
    // shift like a real encoder would.
    const RandomNetworkSpec cone = RandomNetworkSpec::uniform(
        cfg.cone_layers, cfg.d, /*linear_last=*/false, derive_seed(cfg.seed, "bench.cone"));
    const PairDataset pool =
        synth_dataset(cfg.n_train + cfg.n_test, cfg.d, cfg.clean_cos_mean, cfg.clean_cos_std,
                      derive_seed(cfg.seed, "bench.synth"), cone);

    PairDataset train_ds, test_ds;
    train_ds.n = cfg.n_train;
    train_ds.d = pool.d;
    train_ds.x = MatF(cfg.n_train, pool.d);
    train_ds.y = MatF(cfg.n_train, pool.d);
    test_ds.n = cfg.n_test;
    test_ds.d = pool.d;
    test_ds.x = MatF(cfg.n_test, pool.d);
    test_ds.y = MatF(cfg.n_test, pool.d);
    std::copy_n(pool.x.data.begin(), cfg.n_train * pool.d, train_ds.x.data.begin());
    std::copy_n(pool.y.data.begin(), cfg.n_train * pool.d, train_ds.y.data.begin());
    std::copy_n(pool.x.data.begin() + static_cast<long>(cfg.n_train * pool.d), cfg.n_test * pool.d,
                test_ds.x.data.begin());
    std::copy_n(pool.y.data.begin() + static_cast<long>(cfg.n_train * pool.d), cfg.n_test * pool.d,
                test_ds.y.data.begin());

    report.debias = estimate_beta_derangement(train_ds, default_debias_k(train_ds.n),
                                              derive_seed(cfg.seed, "bench.debias"));

    for (std::size_t ri = 0; ri < cfg.ratios.size(); ++ri) {
        const double ratio = cfg.ratios[ri];
        PairDataset noisy = train_ds;
        if (ratio > 0.0) {
            auto [ds, rep] = inject_noise(train_ds, ratio, derive_seed(cfg.seed, "bench.noise", ri));
            noisy = std::move(ds);
        } else {
            noisy.labels.assign(noisy.n, 0);
        }

        // Ratio-level diagnostics: debias on the corrupted set, then the
        // zero-threshold detection split and the weight ranking.
        const DebiasEstimate est = estimate_beta_derangement(
            noisy, default_debias_k(noisy.n), derive_seed(cfg.seed, "bench.debias", ri + 1));
        const PairSimilarities sims = pair_similarities(noisy);
        std::vector<double> debiased(noisy.n);
        for (std::size_t i = 0; i < noisy.n; ++i) debiased[i] = sims.s[i] - est.beta;
        const DetectionReport det = detect(debiased, noisy.labels, 0.0);
        const WeightVector wv = score_dataset(noisy, est, cfg.train.variant);
        RankReport rank;
        if (ratio > 0.0) rank = mean_noise_rank(wv, noisy.labels);

        for (WeightMode mode : cfg.modes) {
            // Oracle weights on an all-clean set are identically 1, so the
            // run would replay the unweighted one; reuse it.
            if (mode == WeightMode::OracleLabels && ratio == 0.0) {
                bool reused = false;
                for (const BenchmarkRun& prev : report.runs) {
                    if (prev.ratio == 0.0 && prev.mode == WeightMode::None) {
                        BenchmarkRun copy = prev;
                        copy.mode = WeightMode::OracleLabels;
                        copy.seconds = 0.0;
                        report.runs.push_back(std::move(copy));
                        reused = true;
                        break;
                    }
                }
                if (reused) continue;
            }

            TrainConfig tc = cfg.train;
            tc.weight_mode = mode;
            // Same seed across modes: identical init and batch order, so the
            // weighting is the only difference between runs.
            tc.seed = derive_seed(cfg.seed, "bench.train", ri);

            const auto t0 = std::chrono::steady_clock::now();
            const TrainResult res = train(noisy, tc);
            const auto t1 = std::chrono::steady_clock::now();

            BenchmarkRun run;
            run.ratio = ratio;
            run.mode = mode;
            run.beta = est.beta;
            run.detection = det;
            run.rank = rank;
            run.seconds = std::chrono::duration<double>(t1 - t0).count();
            if (!res.history.empty()) run.final_loss = res.history.back().loss;
            std::vector<int> ks{1, 5, 10};
            run.final_recall = evaluate_retrieval(res.model, test_ds, ks);
            report.runs.push_back(std::move(run));
        }
    }
    return report;
}

}  // namespace osa
