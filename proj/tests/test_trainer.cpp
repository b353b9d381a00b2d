#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "osa/errors.hpp"
#include "osa/noise.hpp"
#include "osa/rng.hpp"
#include "osa/trainer.hpp"
#include "test_helpers.hpp"

using namespace osa;

namespace {

MatD identity_matrix_batch(std::size_t n, std::size_t d) {
    MatD m(n, d, 0.0);
    for (std::size_t i = 0; i < n && i < d; ++i) m(i, i) = 1.0;
    return m;
}

PairDataset split_head(const PairDataset& ds, std::size_t n) {
    PairDataset out;
    out.n = n;
    out.d = ds.d;
    out.x = MatF(n, ds.d);
    out.y = MatF(n, ds.d);
    std::copy_n(ds.x.data.begin(), n * ds.d, out.x.data.begin());
    std::copy_n(ds.y.data.begin(), n * ds.d, out.y.data.begin());
    return out;
}

}  // namespace

TEST_CASE("contrastive loss closed-form values") {
    SUBCASE("single element batch has zero loss and gradient") {
        MatD m(1, 1);
        m(0, 0) = 0.37;
        const ContrastiveResult r = contrastive_loss(m, 1.0);
        CHECK(r.loss == doctest::Approx(0.0));
        CHECK(r.grad(0, 0) == doctest::Approx(0.0));
    }
    SUBCASE("2x2 identity at tau 1") {
        MatD m(2, 2, 0.0);
        m(0, 0) = m(1, 1) = 1.0;
        const ContrastiveResult r = contrastive_loss(m, 1.0);
        // -log(e / (e + 1)) per row
        CHECK(r.loss == doctest::Approx(0.31326168751822286).epsilon(1e-12));
    }
    SUBCASE("uniform matrix gives log(b)") {
        for (std::size_t b : {2ul, 5ul, 9ul}) {
            MatD m(b, b, 0.42);
            const ContrastiveResult r = contrastive_loss(m, 0.3);
            CHECK(r.loss == doctest::Approx(std::log(static_cast<double>(b))).epsilon(1e-12));
        }
    }
    SUBCASE("shape and weight validation") {
        MatD rect(2, 3, 0.0);
        CHECK_THROWS_AS(contrastive_loss(rect, 1.0), ShapeMismatchError);
        MatD m(2, 2, 0.0);
        std::vector<double> bad_len{1.0};
        CHECK_THROWS_AS(contrastive_loss(m, 1.0, bad_len), ShapeMismatchError);
        std::vector<double> bad_range{0.5, 1.5};
        CHECK_THROWS_AS(contrastive_loss(m, 1.0, bad_range), BadParamsError);
    }
}

TEST_CASE("loss is linear in the per-row weights") {
    auto rng = substream(3, "linw");
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::uniform_real_distribution<double> uw(0.0, 1.0);
    const std::size_t b = 6;
    MatD m(b, b);
    for (double& v : m.data) v = u(rng);
    std::vector<double> w(b);
    for (double& v : w) v = uw(rng);

    const double total = contrastive_loss(m, 0.2, w).loss;
    double acc = 0.0;
    for (std::size_t i = 0; i < b; ++i) {
        std::vector<double> onehot(b, 0.0);
        onehot[i] = 1.0;
        acc += w[i] * contrastive_loss(m, 0.2, onehot).loss;
    }
    CHECK(total == doctest::Approx(acc).epsilon(1e-12));
}

TEST_CASE("analytic gradients match finite differences") {
    const PairDataset batch = normalize(test::random_dataset(6, 10, 17)).ds;
    const ProjectionModel model(10, {8}, 6, 2024);
    std::vector<double> w{1.0, 0.3, 0.0, 0.8, 1.0, 0.5};
    const double err = gradient_check(model, batch, w, 0.2, 1e-4);
    CHECK(err < 1e-4);
}

TEST_CASE("gradient check without weights and at low temperature") {
    const PairDataset batch = normalize(test::random_dataset(5, 8, 23)).ds;
    const ProjectionModel model(8, {12, 6}, 4, 77);
    const double err = gradient_check(model, batch, {}, 0.07, 1e-4);
    CHECK(err < 1e-4);
}

TEST_CASE("zero-weight batch has exactly zero gradient") {
    const PairDataset batch = normalize(test::random_dataset(4, 6, 29)).ds;
    ProjectionModel model(6, {5}, 3, 31);
    std::vector<double> w(4, 0.0);

    // Analytic gradient path.
    const double err = gradient_check(model, batch, w, 0.1, 1e-4);
    CHECK(err < 1e-8);  // both sides identically zero
}

TEST_CASE("train: zero-weight samples touch nothing") {
    PairDataset ds = normalize(test::random_dataset(12, 8, 41, false)).ds;
    ds.labels.assign(12, 0);
    ds.labels[5] = 1;  // oracle weight 0
    TrainConfig cfg;
    cfg.epochs = 2;
    cfg.batch_size = 6;
    cfg.learning_rate = 0.1;
    cfg.temperature = 0.2;
    cfg.seed = 99;
    cfg.hidden_widths = {6};
    cfg.emb_dim = 4;
    cfg.weight_mode = WeightMode::OracleLabels;

    const TrainResult a = train(ds, cfg);

    // Replace the excluded sample's embeddings with junk; nothing may move.
    PairDataset mangled = ds;
    for (std::size_t j = 0; j < ds.d; ++j) {
        mangled.x(5, j) = 9.0f;
        mangled.y(5, j) = -3.0f;
    }
    const TrainResult b = train(mangled, cfg);
    REQUIRE(a.model.parameter_count() == b.model.parameter_count());
    for (std::size_t p = 0; p < a.model.parameter_count(); ++p)
        CHECK(a.model.parameters()[p] == b.model.parameters()[p]);
}

TEST_CASE("train: all-zero weights leave the initial parameters untouched") {
    PairDataset ds = normalize(test::random_dataset(8, 6, 43)).ds;
    ds.labels.assign(8, 1);  // everything noisy -> oracle weights all zero
    TrainConfig cfg;
    cfg.epochs = 3;
    cfg.batch_size = 4;
    cfg.seed = 7;
    cfg.hidden_widths = {5};
    cfg.emb_dim = 3;
    cfg.weight_mode = WeightMode::OracleLabels;

    const TrainResult res = train(ds, cfg);
    const ProjectionModel fresh(ds.d, cfg.hidden_widths, cfg.emb_dim,
                                derive_seed(cfg.seed, "train.init"));
    for (std::size_t p = 0; p < res.model.parameter_count(); ++p)
        CHECK(res.model.parameters()[p] == fresh.parameters()[p]);
    for (const EpochMetrics& em : res.history) CHECK(em.loss == 0.0);
}

TEST_CASE("train is bitwise deterministic") {
    const PairDataset ds = normalize(test::random_dataset(30, 10, 47)).ds;
    const PairDataset test_ds = normalize(test::random_dataset(10, 10, 48)).ds;
    TrainConfig cfg;
    cfg.epochs = 3;
    cfg.batch_size = 8;
    cfg.seed = 11;
    cfg.hidden_widths = {8};
    cfg.emb_dim = 5;

    const TrainResult a = train(ds, cfg, &test_ds);
    const TrainResult b = train(ds, cfg, &test_ds);
    REQUIRE(a.history.size() == b.history.size());
    for (std::size_t e = 0; e < a.history.size(); ++e) {
        CHECK(a.history[e].loss == b.history[e].loss);
        CHECK(a.history[e].recall.i2t == b.history[e].recall.i2t);
    }
    for (std::size_t p = 0; p < a.model.parameter_count(); ++p)
        CHECK(a.model.parameters()[p] == b.model.parameters()[p]);
}

TEST_CASE("retrieval: identity projection on orthonormal self-paired data") {
    const std::size_t n = 6;
    PairDataset test_ds;
    test_ds.n = n;
    test_ds.d = n;
    test_ds.x = MatF(n, n);
    for (std::size_t i = 0; i < n; ++i) test_ds.x(i, i) = 1.0f;
    test_ds.y = test_ds.x;

    ProjectionModel model(n, {}, n, 1);
    // Overwrite the single linear layer of both encoders with the identity.
    auto params = model.parameters();
    std::fill(params.begin(), params.end(), 0.0);
    const std::size_t side_size = model.parameter_count() / 2;
    for (int side = 0; side < 2; ++side)
        for (std::size_t i = 0; i < n; ++i)
            params[static_cast<std::size_t>(side) * side_size + i * n + i] = 1.0;

    const std::vector<int> ks{1, 5};
    const RecallReport rep = evaluate_retrieval(model, test_ds, ks);
    CHECK(rep.at(1, true) == 100.0);
    CHECK(rep.at(1, false) == 100.0);
}

TEST_CASE("retrieval: random model scores near chance, recall grows with k") {
    const PairDataset test_ds = normalize(test::random_dataset(300, 12, 53)).ds;
    double r1_sum = 0.0;
    for (std::uint64_t seed : {1ull, 2ull}) {
        const ProjectionModel model(12, {8}, 6, seed);
        const std::vector<int> ks{1, 5, 10};
        const RecallReport rep = evaluate_retrieval(model, test_ds, ks);
        r1_sum += rep.at(1, true);
        CHECK(rep.at(1, true) <= rep.at(5, true));
        CHECK(rep.at(5, true) <= rep.at(10, true));
    }
    // Chance level is 100/300 ~ 0.33% per direction.
    CHECK(r1_sum / 2.0 < 2.5);
}

TEST_CASE("retrieval rejects an empty or noisy test set") {
    const ProjectionModel model(4, {}, 4, 3);
    PairDataset empty;
    CHECK_THROWS_AS(evaluate_retrieval(model, empty, std::vector<int>{1}),
                    EmptyTestSetError);
    PairDataset noisy = test::random_dataset(4, 4, 5);
    noisy.labels.assign(4, 0);
    noisy.labels[2] = 1;
    CHECK_THROWS_AS(evaluate_retrieval(model, noisy, std::vector<int>{1}), BadParamsError);
}

TEST_CASE("config validation") {
    TrainConfig cfg;
    cfg.batch_size = 1;
    CHECK_THROWS_AS(cfg.validate(), ConfigInvalidError);
    cfg.batch_size = 4;
    cfg.temperature = 0.0;
    CHECK_THROWS_AS(cfg.validate(), ConfigInvalidError);
    cfg.temperature = 0.07;
    CHECK_NOTHROW(cfg.validate());

    PairDataset no_labels = normalize(test::random_dataset(6, 4, 3)).ds;
    cfg.weight_mode = WeightMode::OracleLabels;
    cfg.hidden_widths = {4};
    cfg.emb_dim = 3;
    CHECK_THROWS_AS(train(no_labels, cfg), MissingLabelsError);
}

TEST_CASE("oracle weighting beats no weighting under heavy noise") {
    const RandomNetworkSpec cone =
        RandomNetworkSpec::uniform(1, 32, false, derive_seed(61, "cone"));
    const PairDataset pool = synth_dataset(950, 32, 0.75, 0.03, 62, cone);
    const PairDataset train_clean = split_head(pool, 800);
    PairDataset test_ds;
    test_ds.n = 150;
    test_ds.d = pool.d;
    test_ds.x = MatF(150, pool.d);
    test_ds.y = MatF(150, pool.d);
    std::copy_n(pool.x.data.begin() + 800 * pool.d, 150 * pool.d, test_ds.x.data.begin());
    std::copy_n(pool.y.data.begin() + 800 * pool.d, 150 * pool.d, test_ds.y.data.begin());

    auto [noisy, rep] = inject_noise(train_clean, 0.5, 63);

    TrainConfig cfg;
    cfg.epochs = 25;
    cfg.batch_size = 64;
    cfg.learning_rate = 0.3;
    cfg.temperature = 0.2;
    cfg.seed = 64;
    cfg.hidden_widths = {32};
    cfg.emb_dim = 16;

    cfg.weight_mode = WeightMode::None;
    const TrainResult base = train(noisy, cfg);
    cfg.weight_mode = WeightMode::OracleLabels;
    const TrainResult oracle = train(noisy, cfg);

    const std::vector<int> ks{1};
    const double base_r1 = evaluate_retrieval(base.model, test_ds, ks).mean_r1();
    const double oracle_r1 = evaluate_retrieval(oracle.model, test_ds, ks).mean_r1();
    CHECK(oracle_r1 > base_r1 + 3.0);
}

TEST_CASE("identity check: ones matrix probe through gather helper") {
    // Guards the row-major parameter layout assumed by the identity test.
    ProjectionModel model(3, {}, 3, 9);
    auto params = model.parameters();
    std::fill(params.begin(), params.end(), 0.0);
    const std::size_t side = model.parameter_count() / 2;
    for (std::size_t i = 0; i < 3; ++i) {
        params[i * 3 + i] = 1.0;
        params[side + i * 3 + i] = 1.0;
    }
    const MatD in = identity_matrix_batch(3, 3);
    const MatD out = model.embed(0, in);
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j)
            CHECK(out(i, j) == doctest::Approx(i == j ? 1.0 : 0.0));
}
