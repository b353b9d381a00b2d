// osa: command-line front end for the OSA noisy-label mitigation toolkit.
// Subcommands: debias, score, detect, rank, inject-noise, synth, gmm, train,
// simulate {ortho, cone, gaussian}, benchmark. Reports are JSON on stdout
// (pretty by default, single-line with --json); every report carries
// {tool_version, seed, config}.

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "osa/benchmark.hpp"
#include "osa/debias.hpp"
#include "osa/errors.hpp"
#include "osa/gmm.hpp"
#include "osa/io.hpp"
#include "osa/noise.hpp"
#include "osa/parallel.hpp"
#include "osa/rng.hpp"
#include "osa/scoring.hpp"
#include "osa/theory.hpp"
#include "osa/trainer.hpp"
#include "osa/version.hpp"

using nlohmann::json;

namespace {

struct GlobalOpts {
    int threads = osa::available_threads();
    bool compact = false;  // --json
};

void emit(const json& j, const GlobalOpts& g) {
    if (g.compact)
        std::cout << j.dump() << "\n";
    else
        std::cout << j.dump(2) << "\n";
}

json envelope(std::uint64_t seed, json config) {
    return json{{"tool_version", osa::kVersion}, {"seed", seed}, {"config", std::move(config)}};
}

osa::PairDataset load_normalized(const std::string& path) {
    const osa::NormalizeResult norm = osa::normalize(osa::load(path));
    if (norm.zero_rows > 0)
        std::cerr << "warning: " << norm.zero_rows << " zero rows left unnormalized in "
                  << path << "\n";
    return norm.ds;
}

std::vector<double> read_value_column(const std::string& path, const std::string& column) {
    std::ifstream in(path);
    if (!in) throw osa::Error("cannot open " + path);
    std::vector<double> values;
    std::string line;
    int col = -1;
    bool first = true;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::stringstream ss(line);
        std::string f;
        while (std::getline(ss, f, ',')) fields.push_back(f);
        if (first) {
            first = false;
            for (std::size_t i = 0; i < fields.size(); ++i)
                if (fields[i] == column) col = static_cast<int>(i);
            if (col >= 0) continue;  // header row consumed
            col = fields.size() > 1 ? static_cast<int>(fields.size()) - 1 : 0;
        }
        try {
            values.push_back(std::stod(fields.at(static_cast<std::size_t>(col))));
        } catch (const std::exception&) {
            throw osa::Error("non-numeric value in " + path + ": " + line);
        }
    }
    if (values.empty()) throw osa::Error("no values parsed from " + path);
    return values;
}

json recall_json(const osa::RecallReport& r) {
    json i2t = json::object(), t2i = json::object();
    for (std::size_t i = 0; i < r.ks.size(); ++i) {
        i2t["r" + std::to_string(r.ks[i])] = r.i2t[i];
        t2i["r" + std::to_string(r.ks[i])] = r.t2i[i];
    }
    return json{{"i2t", i2t}, {"t2i", t2i}};
}

json detection_json(const osa::DetectionReport& d) {
    return json{{"threshold", d.threshold},
                {"accuracy", d.accuracy},
                {"recall", d.recall},
                {"clean_as_clean", d.clean_as_clean},
                {"clean_as_noisy", d.clean_as_noisy},
                {"noisy_as_noisy", d.noisy_as_noisy},
                {"noisy_as_clean", d.noisy_as_clean}};
}

json rank_json(const osa::RankReport& r) {
    return json{{"mean_noise_rank", r.mean_noise_rank},
                {"optimal_rank", r.optimal_rank},
                {"n", r.n},
                {"m", r.m}};
}

json debias_json(const osa::DebiasEstimate& e) {
    return json{{"beta", e.beta},
                {"variance", e.variance},
                {"k", e.k},
                {"method", osa::to_string(e.method)},
                {"seed", e.seed}};
}

double beta_from_sources(const std::optional<double>& beta_flag,
                         const std::string& beta_json_path) {
    if (beta_flag) return *beta_flag;
    if (beta_json_path.empty())
        throw osa::BadParamsError("either --beta or --beta-json is required");
    std::ifstream in(beta_json_path);
    if (!in) throw osa::Error("cannot open " + beta_json_path);
    json j = json::parse(in);
    if (j.contains("beta")) return j["beta"].get<double>();
    throw osa::Error("no \"beta\" key in " + beta_json_path);
}

osa::TrainConfig train_config_from_json(const json& j) {
    osa::TrainConfig cfg;
    cfg.epochs = j.value("epochs", cfg.epochs);
    cfg.batch_size = j.value("batch_size", cfg.batch_size);
    cfg.learning_rate = j.value("lr", cfg.learning_rate);
    cfg.temperature = j.value("temperature", cfg.temperature);
    cfg.seed = j.value("seed", cfg.seed);
    cfg.emb_dim = j.value("emb_dim", cfg.emb_dim);
    if (j.contains("hidden_widths"))
        cfg.hidden_widths = j["hidden_widths"].get<std::vector<std::size_t>>();
    if (j.contains("variant"))
        cfg.variant = osa::score_variant_from_string(j["variant"].get<std::string>());
    if (j.contains("beta_source")) {
        const auto& b = j["beta_source"];
        if (b.is_number())
            cfg.fixed_beta = b.get<double>();
        else if (b.get<std::string>() != "derangement")
            throw osa::ConfigInvalidError("beta_source must be \"derangement\" or a number");
    }
    return cfg;
}

json train_config_json(const osa::TrainConfig& cfg) {
    json j{{"epochs", cfg.epochs},
           {"batch_size", cfg.batch_size},
           {"lr", cfg.learning_rate},
           {"temperature", cfg.temperature},
           {"seed", cfg.seed},
           {"hidden_widths", cfg.hidden_widths},
           {"emb_dim", cfg.emb_dim},
           {"variant", osa::to_string(cfg.variant)},
           {"weight_mode", osa::to_string(cfg.weight_mode)}};
    j["beta_source"] = cfg.fixed_beta ? json(*cfg.fixed_beta) : json("derangement");
    return j;
}

void add_debias(CLI::App& app, GlobalOpts& g) {
    auto* cmd = app.add_subcommand("debias", "Estimate the cone-space shift beta from random pairs");
    auto input = std::make_shared<std::string>();
    auto external = std::make_shared<std::string>();
    auto k = std::make_shared<std::uint64_t>(0);
    auto seed = std::make_shared<std::uint64_t>(42);
    cmd->add_option("--input", *input, "OSAE dataset")->required();
    cmd->add_option("--external", *external, "OSAE file of genuinely random pairs");
    cmd->add_option("--k", *k, "random pairs to sample (default min(10n, 100000))");
    cmd->add_option("--seed", *seed, "RNG seed");
    cmd->callback([=, &g] {
        json config{{"input", *input}, {"k", *k}, {"seed", *seed}};
        osa::DebiasEstimate est;
        if (!external->empty()) {
            config["external"] = *external;
            est = osa::estimate_beta_external(load_normalized(*external), *seed);
        } else {
            const osa::PairDataset ds = load_normalized(*input);
            const std::uint64_t kk = *k > 0 ? *k : osa::default_debias_k(ds.n);
            config["k"] = kk;
            est = osa::estimate_beta_derangement(ds, kk, *seed);
        }
        json out = envelope(*seed, config);
        out.update(debias_json(est));
        emit(out, g);
    });
}

void add_score(CLI::App& app, GlobalOpts& g) {
    auto* cmd = app.add_subcommand("score", "Convert similarities into cleanliness weights");
    auto input = std::make_shared<std::string>();
    auto out_path = std::make_shared<std::string>();
    auto beta_json = std::make_shared<std::string>();
    auto beta = std::make_shared<std::optional<double>>();
    auto variant = std::make_shared<std::string>("paper-cubic");
    cmd->add_option("--input", *input, "OSAE dataset")->required();
    cmd->add_option("--out", *out_path, "weights CSV path")->required();
    cmd->add_option("--beta", *beta, "space shift to subtract");
    cmd->add_option("--beta-json", *beta_json, "debias JSON report with a beta field");
    cmd->add_option("--variant", *variant, "paper-cubic | smoothstep | hard-threshold");
    cmd->callback([=, &g] {
        const double b = beta_from_sources(*beta, *beta_json);
        const osa::ScoreVariant v = osa::score_variant_from_string(*variant);
        const osa::PairDataset ds = load_normalized(*input);
        const osa::PairSimilarities sims = osa::pair_similarities(ds);
        const osa::WeightVector wv = osa::score_dataset(ds, b, v);

        std::ofstream out(*out_path);
        if (!out) throw osa::Error("cannot open " + *out_path + " for writing");
        out << "index,similarity,t,weight\n";
        for (std::size_t i = 0; i < ds.n; ++i)
            out << i << "," << sims.s[i] << "," << (sims.s[i] - b) << "," << wv.w[i] << "\n";

        json config{{"input", *input}, {"out", *out_path}, {"beta", b}, {"variant", *variant}};
        json rep = envelope(0, config);
        rep["n"] = ds.n;
        rep["beta_used"] = wv.beta_used;
        rep["degenerate_pairs"] = wv.degenerate_pairs;
        emit(rep, g);
    });
}

void add_detect(CLI::App& app, GlobalOpts& g) {
    auto* cmd = app.add_subcommand("detect", "Zero-threshold noise detection quality");
    auto input = std::make_shared<std::string>();
    auto beta_json = std::make_shared<std::string>();
    auto beta = std::make_shared<std::optional<double>>();
    auto threshold = std::make_shared<double>(0.0);
    cmd->add_option("--input", *input, "OSAE dataset with labels")->required();
    cmd->add_option("--beta", *beta, "space shift to subtract");
    cmd->add_option("--beta-json", *beta_json, "debias JSON report");
    cmd->add_option("--threshold", *threshold, "decision threshold on s - beta");
    cmd->callback([=, &g] {
        const double b = beta_from_sources(*beta, *beta_json);
        const osa::PairDataset ds = load_normalized(*input);
        if (!ds.has_labels())
            throw osa::MissingLabelsError("detect: input file has no labels");
        const osa::PairSimilarities sims = osa::pair_similarities(ds);
        std::vector<double> t(ds.n);
        for (std::size_t i = 0; i < ds.n; ++i) t[i] = sims.s[i] - b;
        const osa::DetectionReport rep = osa::detect(t, ds.labels, *threshold);

        json config{{"input", *input}, {"beta", b}, {"threshold", *threshold}};
        json out = envelope(0, config);
        out.update(detection_json(rep));
        emit(out, g);
    });
}

void add_rank(CLI::App& app, GlobalOpts& g) {
    auto* cmd = app.add_subcommand("rank", "Mean noise rank of a weight file");
    auto weights_path = std::make_shared<std::string>();
    auto input = std::make_shared<std::string>();
    cmd->add_option("--weights", *weights_path, "CSV with a weight column")->required();
    cmd->add_option("--input", *input, "OSAE dataset with labels")->required();
    cmd->callback([=, &g] {
        const std::vector<double> w = read_value_column(*weights_path, "weight");
        const osa::PairDataset ds = osa::load(*input);
        if (!ds.has_labels()) throw osa::MissingLabelsError("rank: input file has no labels");
        const osa::RankReport rep = osa::mean_noise_rank(w, ds.labels);
        json config{{"weights", *weights_path}, {"input", *input}};
        json out = envelope(0, config);
        out.update(rank_json(rep));
        emit(out, g);
    });
}

void add_inject(CLI::App& app, GlobalOpts& g) {
    auto* cmd = app.add_subcommand("inject-noise", "Corrupt a fraction of pairs by derangement");
    auto input = std::make_shared<std::string>();
    auto out_path = std::make_shared<std::string>();
    auto report_path = std::make_shared<std::string>();
    auto ratio = std::make_shared<double>(0.0);
    auto seed = std::make_shared<std::uint64_t>(42);
    cmd->add_option("--input", *input, "clean OSAE dataset")->required();
    cmd->add_option("--out", *out_path, "corrupted OSAE output")->required();
    cmd->add_option("--ratio", *ratio, "noise ratio in [0,1]")->required();
    cmd->add_option("--seed", *seed, "RNG seed");
    cmd->add_option("--report", *report_path, "write the injection report JSON here");
    cmd->callback([=, &g] {
        const osa::PairDataset ds = osa::load(*input);
        auto [noisy, rep] = osa::inject_noise(ds, *ratio, *seed);
        osa::save(noisy, *out_path);

        json config{{"input", *input}, {"out", *out_path}, {"ratio", *ratio}, {"seed", *seed}};
        json out = envelope(*seed, config);
        out["count_corrupted"] = rep.count_corrupted;
        out["ratio_requested"] = rep.ratio_requested;
        out["permutation_seed"] = rep.permutation_seed;
        out["indices_corrupted"] = rep.indices_corrupted;
        if (!report_path->empty()) {
            std::ofstream rf(*report_path);
            if (!rf) throw osa::Error("cannot open " + *report_path + " for writing");
            rf << out.dump(2) << "\n";
        }
        // The index list can be large; keep stdout to a summary.
        out.erase("indices_corrupted");
        emit(out, g);
    });
}

void add_synth(CLI::App& app, GlobalOpts& g) {
    auto* cmd = app.add_subcommand("synth", "Generate a synthetic paired dataset");
    auto n = std::make_shared<std::size_t>(1000);
    auto d = std::make_shared<std::size_t>(64);
    auto mean = std::make_shared<double>(0.5);
    auto std_dev = std::make_shared<double>(0.1);
    auto cone = std::make_shared<std::string>();
    auto seed = std::make_shared<std::uint64_t>(42);
    auto out_path = std::make_shared<std::string>();
    cmd->add_option("--n", *n, "number of pairs")->required();
    cmd->add_option("--d", *d, "embedding dimension")->required();
    cmd->add_option("--clean-mean", *mean, "target clean cosine mean");
    cmd->add_option("--clean-std", *std_dev, "target clean cosine std");
    cmd->add_option("--cone", *cone, "layers,width of a random ReLU cone network");
    cmd->add_option("--seed", *seed, "RNG seed");
    cmd->add_option("--out", *out_path, "OSAE output path")->required();
    cmd->callback([=, &g] {
        std::optional<osa::RandomNetworkSpec> cone_spec;
        if (!cone->empty()) {
            const auto comma = cone->find(',');
            if (comma == std::string::npos)
                throw osa::BadParamsError("--cone expects layers,width");
            const std::size_t layers = std::stoull(cone->substr(0, comma));
            const std::size_t width = std::stoull(cone->substr(comma + 1));
            if (width != *d)
                throw osa::BadParamsError("--cone width must equal --d in this version");
            cone_spec = osa::RandomNetworkSpec::uniform(
                layers, width, false, osa::derive_seed(*seed, "synth.cone"));
        }
        const osa::PairDataset ds =
            osa::synth_dataset(*n, *d, *mean, *std_dev, *seed, cone_spec);
        osa::save(ds, *out_path);
        json config{{"n", *n},          {"d", *d},     {"clean_mean", *mean},
                    {"clean_std", *std_dev}, {"cone", *cone}, {"seed", *seed},
                    {"out", *out_path}};
        json out = envelope(*seed, config);
        out["written"] = *out_path;
        out["d_out"] = ds.d;
        emit(out, g);
    });
}

void add_gmm(CLI::App& app, GlobalOpts& g) {
    auto* cmd = app.add_subcommand("gmm", "Fit a 2-component 1-D GMM and select clean samples");
    auto values_path = std::make_shared<std::string>();
    auto threshold = std::make_shared<double>(0.95);
    auto orientation = std::make_shared<std::string>("high");
    auto max_iters = std::make_shared<int>(200);
    auto tol = std::make_shared<double>(1e-8);
    auto seed = std::make_shared<std::uint64_t>(42);
    cmd->add_option("--values", *values_path, "CSV of per-sample statistics")->required();
    cmd->add_option("--threshold", *threshold, "posterior threshold for selection");
    cmd->add_option("--orientation", *orientation, "high: clean = high values; low: clean = low");
    cmd->add_option("--max-iters", *max_iters, "EM iteration cap");
    cmd->add_option("--tol", *tol, "log-likelihood improvement tolerance");
    cmd->add_option("--seed", *seed, "RNG seed");
    cmd->callback([=, &g] {
        if (*orientation != "high" && *orientation != "low")
            throw osa::BadParamsError("--orientation must be high or low");
        const std::vector<double> values = read_value_column(*values_path, "value");
        const osa::CleanOrientation orient = *orientation == "high"
                                                 ? osa::CleanOrientation::HighIsClean
                                                 : osa::CleanOrientation::LowIsClean;
        const osa::Gmm1D model = osa::fit_em(values, *max_iters, *tol, *seed, orient);
        const std::vector<std::size_t> selected =
            osa::select_clean(model, values, *threshold);

        json config{{"values", *values_path}, {"threshold", *threshold},
                    {"orientation", *orientation}, {"max_iters", *max_iters},
                    {"tol", *tol}, {"seed", *seed}};
        json out = envelope(*seed, config);
        out["weights"] = model.weight;
        out["means"] = model.mean;
        out["variances"] = model.variance;
        out["iterations_run"] = model.iterations_run;
        out["log_likelihood"] = model.log_likelihood;
        out["degenerate"] = model.degenerate;
        out["selected_count"] = selected.size();
        out["selected"] = selected;
        emit(out, g);
    });
}

void add_train(CLI::App& app, GlobalOpts& g) {
    auto* cmd = app.add_subcommand("train", "Re-weighted contrastive training of projection heads");
    auto input = std::make_shared<std::string>();
    auto test = std::make_shared<std::string>();
    auto config_path = std::make_shared<std::string>();
    auto weights = std::make_shared<std::string>("none");
    cmd->add_option("--input", *input, "training OSAE dataset")->required();
    cmd->add_option("--test", *test, "clean test OSAE dataset");
    cmd->add_option("--config", *config_path, "training config JSON");
    cmd->add_option("--weights", *weights, "none | osa | oracle");
    cmd->callback([=, &g] {
        osa::TrainConfig cfg;
        if (!config_path->empty()) {
            std::ifstream in(*config_path);
            if (!in) throw osa::Error("cannot open " + *config_path);
            cfg = train_config_from_json(json::parse(in));
        }
        cfg.weight_mode = osa::weight_mode_from_string(*weights);

        const osa::PairDataset train_ds = load_normalized(*input);
        std::optional<osa::PairDataset> test_ds;
        if (!test->empty()) test_ds = load_normalized(*test);

        auto stream_epoch = [&](const osa::EpochMetrics& em) {
            json line{{"epoch", em.epoch}, {"loss", em.loss}};
            if (em.has_recall) line.update(recall_json(em.recall));
            std::cout << line.dump() << "\n" << std::flush;
        };
        const osa::TrainResult res =
            osa::train(train_ds, cfg, test_ds ? &*test_ds : nullptr, {}, stream_epoch);

        json config = train_config_json(cfg);
        config["input"] = *input;
        config["test"] = *test;
        json out = envelope(cfg.seed, config);
        out["epochs_run"] = res.history.size();
        out["beta_used"] = res.beta_used;
        if (res.debias) out["debias"] = debias_json(*res.debias);
        if (!res.history.empty()) {
            out["final_loss"] = res.history.back().loss;
            if (res.history.back().has_recall)
                out["final_recall"] = recall_json(res.history.back().recall);
        }
        emit(out, g);
    });
}

void add_simulate(CLI::App& app, GlobalOpts& g) {
    auto* cmd = app.add_subcommand("simulate", "Monte Carlo verification of the geometry results");
    cmd->require_subcommand(1);

    {
        auto* ortho = cmd->add_subcommand("ortho", "Orthogonality concentration probability");
        auto d = std::make_shared<std::size_t>(1024);
        auto a = std::make_shared<double>(0.1);
        auto trials = std::make_shared<std::size_t>(200000);
        auto seed = std::make_shared<std::uint64_t>(42);
        ortho->add_option("--d", *d, "dimension");
        ortho->add_option("--a", *a, "band half-width");
        ortho->add_option("--trials", *trials, "Monte Carlo trials");
        ortho->add_option("--seed", *seed, "RNG seed");
        ortho->callback([=, &g] {
            const double analytic = osa::ortho_prob_analytic(*d, *a);
            const double mc = osa::ortho_prob_montecarlo(*d, *a, *trials, *seed, g.threads);
            json config{{"d", *d}, {"a", *a}, {"trials", *trials}, {"seed", *seed}};
            json out = envelope(*seed, config);
            out["probability"] = mc;
            out["analytic"] = analytic;
            out["abs_error"] = std::fabs(mc - analytic);
            emit(out, g);
        });
    }
    {
        auto* cone = cmd->add_subcommand("cone", "Boundary ordering through random ReLU networks");
        auto layers = std::make_shared<std::size_t>(5);
        auto width = std::make_shared<std::size_t>(512);
        auto trials = std::make_shared<std::size_t>(1000);
        auto clean = std::make_shared<double>(0.3);
        auto noisy = std::make_shared<double>(-0.3);
        auto pool = std::make_shared<std::size_t>(16);
        auto seed = std::make_shared<std::uint64_t>(42);
        cone->add_option("--layers", *layers, "network depth");
        cone->add_option("--width", *width, "layer width");
        cone->add_option("--trials", *trials, "independent networks");
        cone->add_option("--clean", *clean, "clean input cosine");
        cone->add_option("--noisy", *noisy, "noisy input cosine");
        cone->add_option("--pool", *pool, "random pairs per trial for the beta estimate");
        cone->add_option("--seed", *seed, "RNG seed");
        cone->callback([=, &g] {
            osa::ConeSimulationConfig cc;
            cc.layers = *layers;
            cc.width = *width;
            cc.trials = *trials;
            cc.clean_cos = *clean;
            cc.noisy_cos = *noisy;
            cc.pool_pairs_per_trial = *pool;
            cc.seed = *seed;
            cc.threads = g.threads;
            const osa::ConeSimulationResult res = osa::simulate_cone(cc);
            json config{{"layers", *layers}, {"width", *width},   {"trials", *trials},
                        {"clean", *clean},   {"noisy", *noisy},   {"pool", *pool},
                        {"seed", *seed}};
            json out = envelope(*seed, config);
            out["ordering_preserved_rate"] = res.ordering_preserved_rate;
            out["mean_beta"] = res.mean_beta;
            out["mean_clean"] = res.mean_clean;
            out["mean_random"] = res.mean_random;
            out["mean_noisy"] = res.mean_noisy;
            emit(out, g);
        });
    }
    {
        auto* gauss = cmd->add_subcommand("gaussian", "Output-feature Gaussianity check");
        auto layers = std::make_shared<std::size_t>(4);
        auto width = std::make_shared<std::size_t>(256);
        auto samples = std::make_shared<std::size_t>(50000);
        auto input = std::make_shared<std::string>("uniform");
        auto seed = std::make_shared<std::uint64_t>(42);
        gauss->add_option("--layers", *layers, "network depth (final layer linear)");
        gauss->add_option("--width", *width, "layer width");
        gauss->add_option("--samples", *samples, "input samples");
        gauss->add_option("--input", *input, "uniform | gaussian");
        gauss->add_option("--seed", *seed, "RNG seed");
        gauss->callback([=, &g] {
            if (*input != "uniform" && *input != "gaussian")
                throw osa::BadParamsError("--input must be uniform or gaussian");
            const osa::RandomNetworkSpec spec = osa::RandomNetworkSpec::uniform(
                *layers, *width, /*linear_last=*/true, osa::derive_seed(*seed, "sim.gauss"));
            const osa::GaussianityReport rep = osa::gaussianity_report(
                spec,
                *input == "uniform" ? osa::InputDistribution::Uniform
                                    : osa::InputDistribution::Gaussian,
                *samples, *seed, g.threads);
            json config{{"layers", *layers}, {"width", *width}, {"samples", *samples},
                        {"input", *input},   {"seed", *seed}};
            json out = envelope(*seed, config);
            out["max_abs_skewness"] = rep.max_abs_skewness;
            out["max_abs_excess_kurtosis"] = rep.max_abs_excess_kurtosis;
            out["pooled_variance"] = rep.pooled_variance;
            out["theoretical_variance"] = rep.theoretical_variance;
            out["mean_empirical_variance"] = rep.mean_empirical_variance;
            emit(out, g);
        });
    }
}

void add_benchmark(CLI::App& app, GlobalOpts& g) {
    auto* cmd = app.add_subcommand(
        "benchmark", "synth -> inject -> debias -> score -> train -> evaluate pipeline");
    auto seed = std::make_shared<std::uint64_t>(1);
    auto n_train = std::make_shared<std::size_t>(10000);
    auto n_test = std::make_shared<std::size_t>(1000);
    auto d = std::make_shared<std::size_t>(64);
    auto ratios = std::make_shared<std::vector<double>>();
    auto epochs = std::make_shared<int>(0);
    auto variant = std::make_shared<std::string>("paper-cubic");
    auto out_path = std::make_shared<std::string>();
    cmd->add_option("--seed", *seed, "root seed for the whole pipeline");
    cmd->add_option("--n-train", *n_train, "training pairs");
    cmd->add_option("--n-test", *n_test, "test pairs");
    cmd->add_option("--d", *d, "raw dimension");
    cmd->add_option("--ratios", *ratios, "noise ratios to sweep")->expected(-1);
    cmd->add_option("--epochs", *epochs, "override training epochs");
    cmd->add_option("--variant", *variant, "scoring variant for the OSA runs");
    cmd->add_option("--out", *out_path, "also write the report JSON here");
    cmd->callback([=, &g] {
        osa::BenchmarkConfig cfg;
        cfg.seed = *seed;
        cfg.n_train = *n_train;
        cfg.n_test = *n_test;
        cfg.d = *d;
        if (!ratios->empty()) cfg.ratios = *ratios;
        if (*epochs > 0) cfg.train.epochs = *epochs;
        cfg.train.variant = osa::score_variant_from_string(*variant);
        const osa::BenchmarkReport rep = osa::run_benchmark(cfg);

        json config{{"seed", cfg.seed},
                    {"n_train", cfg.n_train},
                    {"n_test", cfg.n_test},
                    {"d", cfg.d},
                    {"clean_cos_mean", cfg.clean_cos_mean},
                    {"clean_cos_std", cfg.clean_cos_std},
                    {"cone_layers", cfg.cone_layers},
                    {"ratios", cfg.ratios},
                    {"train", train_config_json(cfg.train)}};
        json out = envelope(cfg.seed, config);
        out["debias"] = debias_json(rep.debias);
        out["runs"] = json::array();
        for (const osa::BenchmarkRun& r : rep.runs) {
            json jr{{"ratio", r.ratio},
                    {"mode", osa::to_string(r.mode)},
                    {"beta", r.beta},
                    {"final_loss", r.final_loss},
                    {"seconds", r.seconds},
                    {"recall", recall_json(r.final_recall)},
                    {"detection", detection_json(r.detection)}};
            if (r.ratio > 0.0) jr["rank"] = rank_json(r.rank);
            out["runs"].push_back(std::move(jr));
        }
        if (!out_path->empty()) {
            std::ofstream f(*out_path);
            if (!f) throw osa::Error("cannot open " + *out_path + " for writing");
            f << out.dump(2) << "\n";
        }
        emit(out, g);
    });
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"OSA: one-step anti-noise toolkit for paired embeddings"};
    app.set_version_flag("--version", std::string("osa ") + osa::kVersion);
    app.require_subcommand(1);

    GlobalOpts g;
    app.add_option("--threads", g.threads, "worker threads (1 = bit-deterministic)");
    app.add_flag("--json", g.compact, "single-line JSON output");

    add_debias(app, g);
    add_score(app, g);
    add_detect(app, g);
    add_rank(app, g);
    add_inject(app, g);
    add_synth(app, g);
    add_gmm(app, g);
    add_train(app, g);
    add_simulate(app, g);
    add_benchmark(app, g);

    // Let trailing global flags (--json, --threads) match the parent app.
    const std::function<void(CLI::App*)> enable_fallthrough = [&](CLI::App* a) {
        for (CLI::App* sc : a->get_subcommands([](const CLI::App*) { return true; })) {
            sc->fallthrough();
            enable_fallthrough(sc);
        }
    };
    enable_fallthrough(&app);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;  // usage error
    } catch (const osa::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
