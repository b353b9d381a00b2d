#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "osa/debias.hpp"
#include "osa/errors.hpp"
#include "osa/noise.hpp"
#include "osa/rng.hpp"
#include "osa/stats.hpp"
#include "test_helpers.hpp"

using namespace osa;

TEST_CASE("inject_noise: ratio 0 returns the input with clean labels") {
    const PairDataset ds = test::random_dataset(10, 4, 1);
    auto [out, rep] = inject_noise(ds, 0.0, 5);
    CHECK(rep.count_corrupted == 0);
    CHECK(out.x.data == ds.x.data);
    CHECK(out.y.data == ds.y.data);
    CHECK(std::count(out.labels.begin(), out.labels.end(), 0) == 10);
}

TEST_CASE("inject_noise: ratio 1 is a derangement") {
    const PairDataset ds = test::random_dataset(20, 4, 2);
    auto [out, rep] = inject_noise(ds, 1.0, 6);
    CHECK(rep.count_corrupted == 20);
    for (std::size_t i = 0; i < 20; ++i) {
        CHECK(out.labels[i] == 1);
        // No y row may stay in place.
        bool same = true;
        for (std::size_t j = 0; j < 4; ++j)
            if (out.y(i, j) != ds.y(i, j)) same = false;
        CHECK_FALSE(same);
    }
}

TEST_CASE("inject_noise: exact corruption count and preserved content") {
    const PairDataset ds = test::random_dataset(1000, 6, 3);
    auto [out, rep] = inject_noise(ds, 0.5, 7);
    CHECK(rep.count_corrupted == 500);
    CHECK(std::count(out.labels.begin(), out.labels.end(), 1) == 500);
    CHECK(rep.indices_corrupted.size() == 500);
    CHECK(std::is_sorted(rep.indices_corrupted.begin(), rep.indices_corrupted.end()));

    // x untouched.
    CHECK(out.x.data == ds.x.data);

    // y rows are a permutation of the originals (multiset equality).
    auto row_key = [](const MatF& m, std::size_t i) {
        return std::vector<float>(m.row(i).begin(), m.row(i).end());
    };
    std::map<std::vector<float>, int> before, after;
    for (std::size_t i = 0; i < ds.n; ++i) {
        before[row_key(ds.y, i)]++;
        after[row_key(out.y, i)]++;
    }
    CHECK(before == after);

    // Labels agree with the report's index list.
    for (std::uint32_t i : rep.indices_corrupted) CHECK(out.labels[i] == 1);
}

TEST_CASE("inject_noise error paths") {
    const PairDataset ds = test::random_dataset(10, 4, 4);
    CHECK_THROWS_AS(inject_noise(ds, 0.1, 0), SubsetTooSmallError);  // round(1) = 1
    CHECK_THROWS_AS(inject_noise(ds, -0.2, 0), BadParamsError);
    CHECK_THROWS_AS(inject_noise(ds, 1.5, 0), BadParamsError);
}

TEST_CASE("synth_dataset hits the requested cosine exactly when std = 0") {
    const PairDataset ds = synth_dataset(50, 32, 0.6, 0.0, 11);
    const PairSimilarities sims = pair_similarities(ds);
    for (double s : sims.s) CHECK(std::fabs(s - 0.6) <= 1e-5);
}

TEST_CASE("synth_dataset near mean 1 collapses y onto x") {
    const PairDataset ds = synth_dataset(10, 16, 0.999999, 0.0, 12);
    for (std::size_t i = 0; i < ds.n; ++i)
        for (std::size_t j = 0; j < ds.d; ++j)
            CHECK(ds.y(i, j) == doctest::Approx(ds.x(i, j)).epsilon(0.01));
}

TEST_CASE("synth_dataset cosine spread follows the requested std") {
    const PairDataset ds = synth_dataset(4000, 24, 0.5, 0.08, 13);
    const PairSimilarities sims = pair_similarities(ds);
    const auto mv = mean_and_variance(sims.s);
    CHECK(mv.mean == doctest::Approx(0.5).epsilon(0.02));
    CHECK(std::sqrt(mv.variance) == doctest::Approx(0.08).epsilon(0.1));
}

TEST_CASE("synth_dataset through a cone acquires a positive space shift") {
    const RandomNetworkSpec cone =
        RandomNetworkSpec::uniform(3, 48, false, derive_seed(99, "cone"));
    const PairDataset ds = synth_dataset(400, 48, 0.5, 0.05, 14, cone);
    const DebiasEstimate est = estimate_beta_derangement(ds, 4000, 15);
    CHECK(est.beta > 0.05);
    // Clean pairs must stay above the shifted boundary on average.
    const PairSimilarities sims = pair_similarities(ds);
    const auto mv = mean_and_variance(sims.s);
    CHECK(mv.mean > est.beta);
}

TEST_CASE("synth_dataset parameter validation") {
    CHECK_THROWS_AS(synth_dataset(10, 1, 0.5, 0.1, 0), BadParamsError);
    CHECK_THROWS_AS(synth_dataset(10, 8, 0.0, 0.1, 0), BadParamsError);
    CHECK_THROWS_AS(synth_dataset(10, 8, 1.0, 0.1, 0), BadParamsError);
}

TEST_CASE("detect: perfectly separated scores") {
    std::vector<double> t;
    std::vector<std::uint8_t> labels;
    for (int i = 0; i < 50; ++i) {
        t.push_back(0.2);
        labels.push_back(0);
        t.push_back(-0.2);
        labels.push_back(1);
    }
    const DetectionReport rep = detect(t, labels, 0.0);
    CHECK(rep.accuracy == 100.0);
    CHECK(rep.recall == 100.0);
    CHECK(rep.clean_as_clean + rep.clean_as_noisy + rep.noisy_as_noisy + rep.noisy_as_clean ==
          100);
}

TEST_CASE("detect matches the Gaussian tail analytics") {
    auto rng = substream(31, "detect");
    std::normal_distribution<double> clean(0.2, 0.05);
    std::normal_distribution<double> noisy(-0.1, 0.05);
    std::vector<double> t;
    std::vector<std::uint8_t> labels;
    const std::size_t half = 50000;
    for (std::size_t i = 0; i < half; ++i) {
        t.push_back(clean(rng));
        labels.push_back(0);
        t.push_back(noisy(rng));
        labels.push_back(1);
    }
    const DetectionReport rep = detect(t, labels, 0.0);
    const double recall_expected = 100.0 * normal_cdf(0.1 / 0.05);  // ~97.72
    const double acc_expected = 100.0 * normal_cdf(0.2 / 0.05);     // ~99.997
    CHECK(std::fabs(rep.recall - recall_expected) <= 1.0);
    CHECK(std::fabs(rep.accuracy - acc_expected) <= 0.5);
}

TEST_CASE("detect is threshold-monotone") {
    auto rng = substream(32, "mono");
    std::normal_distribution<double> nd(0.05, 0.2);
    std::vector<double> t(2000);
    std::vector<std::uint8_t> labels(2000);
    std::bernoulli_distribution lab(0.4);
    for (std::size_t i = 0; i < t.size(); ++i) {
        t[i] = nd(rng);
        labels[i] = lab(rng) ? 1 : 0;
    }
    double prev_recall = -1.0, prev_acc = 101.0;
    for (double thr : {-0.3, -0.1, 0.0, 0.1, 0.3}) {
        const DetectionReport rep = detect(t, labels, thr);
        CHECK(rep.recall >= prev_recall);
        CHECK(rep.accuracy <= prev_acc);
        prev_recall = rep.recall;
        prev_acc = rep.accuracy;
    }
}

TEST_CASE("detect requires labels") {
    std::vector<double> t{0.1};
    CHECK_THROWS_AS(detect(t, {}, 0.0), MissingLabelsError);
}

TEST_CASE("optimal rank values") {
    CHECK(optimal_rank(2000, 370) == doctest::Approx(1815.5));
    CHECK(optimal_rank(2000, 953) == doctest::Approx(1524.0));
}

TEST_CASE("mean_noise_rank basics and ties") {
    // weights descending 0.9, 0.8, 0.7, 0.6; noisy at positions 2, 3.
    std::vector<double> w{0.9, 0.8, 0.7, 0.6};
    std::vector<std::uint8_t> labels{0, 0, 1, 1};
    const RankReport rep = mean_noise_rank(w, labels);
    CHECK(rep.mean_noise_rank == doctest::Approx(3.5));
    CHECK(rep.optimal_rank == doctest::Approx(3.5));

    // All weights equal: ranks follow the index order.
    std::vector<double> ties{0.5, 0.5, 0.5};
    std::vector<std::uint8_t> l2{1, 0, 0};
    CHECK(mean_noise_rank(ties, l2).mean_noise_rank == doctest::Approx(1.0));
}

TEST_CASE("all-noisy data pins the mean rank at (n+1)/2") {
    auto rng = substream(41, "allnoise");
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> w(31);
    std::vector<std::uint8_t> labels(31, 1);
    for (double& v : w) v = u(rng);
    const RankReport rep = mean_noise_rank(w, labels);
    CHECK(rep.mean_noise_rank == doctest::Approx((31.0 + 1.0) / 2.0));
}

TEST_CASE("rank statistic is invariant under strictly increasing transforms") {
    auto rng = substream(42, "xform");
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::bernoulli_distribution lab(0.35);
    for (int inst = 0; inst < 100; ++inst) {
        std::vector<double> w(60);
        std::vector<std::uint8_t> labels(60);
        bool any = false;
        for (std::size_t i = 0; i < w.size(); ++i) {
            w[i] = u(rng);
            labels[i] = lab(rng) ? 1 : 0;
            any |= labels[i] == 1;
        }
        if (!any) labels[0] = 1;
        const double base = mean_noise_rank(w, labels).mean_noise_rank;
        std::vector<double> expw(w), cubew(w);
        for (std::size_t i = 0; i < w.size(); ++i) {
            expw[i] = std::exp(3.0 * w[i]);
            cubew[i] = w[i] * w[i] * w[i] + 2.0;
        }
        CHECK(mean_noise_rank(expw, labels).mean_noise_rank == doctest::Approx(base));
        CHECK(mean_noise_rank(cubew, labels).mean_noise_rank == doctest::Approx(base));
    }
}

TEST_CASE("optimal rank formula confirmed by enumeration on small instances") {
    // Over all ways to place m noisy samples among n ranks, the mean noise
    // rank is maximal when they occupy the last m ranks.
    for (std::size_t n = 1; n <= 8; ++n) {
        for (std::size_t m = 1; m <= n; ++m) {
            std::vector<std::size_t> choice(m);
            std::iota(choice.begin(), choice.end(), 0u);
            double best = 0.0;
            for (;;) {
                double mean = 0.0;
                for (std::size_t c : choice) mean += static_cast<double>(c + 1);
                best = std::max(best, mean / static_cast<double>(m));
                // next combination
                std::size_t i = m;
                while (i-- > 0) {
                    if (choice[i] + (m - i) < n) {
                        ++choice[i];
                        for (std::size_t j = i + 1; j < m; ++j) choice[j] = choice[j - 1] + 1;
                        break;
                    }
                    if (i == 0) goto done;
                }
            }
        done:
            CHECK(best == doctest::Approx(optimal_rank(n, m)));
        }
    }
}

TEST_CASE("mean_noise_rank error paths") {
    std::vector<double> w{0.1, 0.2};
    CHECK_THROWS_AS(mean_noise_rank(w, {}), MissingLabelsError);
    std::vector<std::uint8_t> clean{0, 0};
    CHECK_THROWS_AS(mean_noise_rank(w, clean), BadParamsError);
}
