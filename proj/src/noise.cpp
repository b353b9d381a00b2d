#include "osa/noise.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "osa/errors.hpp"
#include "osa/rng.hpp"
#include "osa/sampling.hpp"

namespace osa {

std::pair<PairDataset, NoiseInjectionReport> inject_noise(const PairDataset& ds,
                                                          double ratio,
                                                          std::uint64_t seed) {
    ds.validate();
    if (!(ratio >= 0.0 && ratio <= 1.0))
        throw BadParamsError("inject_noise: ratio must lie in [0, 1]");

    const std::size_t count =
        static_cast<std::size_t>(std::llround(ratio * static_cast<double>(ds.n)));

    NoiseInjectionReport report;
    report.ratio_requested = ratio;
    report.count_corrupted = count;
    report.permutation_seed = seed;

    PairDataset out = ds;
    out.labels.assign(ds.n, 0);

    if (count == 0) return {std::move(out), std::move(report)};
    if (count < 2)
        throw SubsetTooSmallError("inject_noise: round(ratio*n) = 1; no derangement exists");

    auto rng = substream(seed, "noise.subset");

    // Partial Fisher-Yates: the first `count` entries are a uniform subset.
    std::vector<std::uint32_t> idx(ds.n);
    std::iota(idx.begin(), idx.end(), 0u);
    for (std::size_t i = 0; i < count; ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, ds.n - 1);
        std::swap(idx[i], idx[pick(rng)]);
    }
    std::vector<std::uint32_t> subset(idx.begin(), idx.begin() + static_cast<long>(count));
    std::sort(subset.begin(), subset.end());

    // Derangement of subset positions: reshuffle until no fixed point
    // (expected e ~ 2.72 attempts).
    std::vector<std::uint32_t> perm(count);
    std::iota(perm.begin(), perm.end(), 0u);
    auto drng = substream(seed, "noise.derangement");
    for (;;) {
        for (std::size_t i = count - 1; i > 0; --i) {
            std::uniform_int_distribution<std::size_t> pick(0, i);
            std::swap(perm[i], perm[pick(drng)]);
        }
        bool fixed_point = false;
        for (std::size_t i = 0; i < count; ++i)
            if (perm[i] == i) {
                fixed_point = true;
                break;
            }
        if (!fixed_point) break;
    }

    for (std::size_t p = 0; p < count; ++p) {
        const std::uint32_t dst = subset[p];
        const std::uint32_t src = subset[perm[p]];
        std::copy(ds.y.row(src).begin(), ds.y.row(src).end(), out.y.row(dst).begin());
        out.labels[dst] = 1;
    }
    report.indices_corrupted = std::move(subset);
    return {std::move(out), std::move(report)};
}

PairDataset synth_dataset(std::size_t n, std::size_t d, double clean_cos_mean,
                          double clean_cos_std, std::uint64_t seed,
                          const std::optional<RandomNetworkSpec>& cone) {
    if (n < 1 || d < 2) throw BadParamsError("synth_dataset: need n >= 1 and d >= 2");
    if (!(clean_cos_mean > 0.0 && clean_cos_mean < 1.0))
        throw BadParamsError("synth_dataset: clean_cos_mean must lie in (0, 1)");
    if (clean_cos_std < 0.0) throw BadParamsError("synth_dataset: clean_cos_std < 0");
    if (cone) {
        cone->validate();
        if (cone->input_dim() != d)
            throw BadParamsError("synth_dataset: cone input dim must equal d");
    }

    auto rng = substream(seed, "synth.pairs");
    std::normal_distribution<double> nd(0.0, 1.0);

    MatD x(n, d), y(n, d);
    for (std::size_t i = 0; i < n; ++i) {
        const std::vector<double> xi = unit_sphere_vector(d, rng);

        double c = clean_cos_mean;
        if (clean_cos_std > 0.0) {
            do {
                c = clean_cos_mean + clean_cos_std * nd(rng);
            } while (!(c > -1.0 && c < 1.0));
        }

        // Random unit direction orthogonal to x_i.
        std::vector<double> w(d);
        for (;;) {
            fill_gaussian(w, rng);
            double dot = 0.0;
            for (std::size_t k = 0; k < d; ++k) dot += w[k] * xi[k];
            for (std::size_t k = 0; k < d; ++k) w[k] -= dot * xi[k];
            const double nw = norm2(w);
            if (nw > 1e-12) {
                for (double& v : w) v /= nw;
                break;
            }
        }

        const double s = std::sqrt(1.0 - c * c);
        for (std::size_t k = 0; k < d; ++k) {
            x(i, k) = xi[k];
            y(i, k) = c * xi[k] + s * w[k];
        }
    }

    if (cone) {
        // Feed the cone at standard-Gaussian scale (norm ~ sqrt(d)); at unit
        // norm the layer biases would dominate and collapse every direction.
        const double scale = std::sqrt(static_cast<double>(d));
        for (double& v : x.data) v *= scale;
        for (double& v : y.data) v *= scale;
        const RandomNetwork net(*cone);
        x = net.forward(x);
        y = net.forward(y);
    }

    PairDataset ds;
    ds.n = n;
    ds.d = cone ? cone->output_dim() : d;
    ds.x = MatF(n, ds.d);
    ds.y = MatF(n, ds.d);
    for (std::size_t i = 0; i < n; ++i) {
        // Store unit rows; re-normalize in double before the float round.
        for (const auto& [src, dst] : {std::pair{&x, &ds.x}, std::pair{&y, &ds.y}}) {
            const auto row = src->row(i);
            const double nr = norm2(row);
            auto out_row = dst->row(i);
            for (std::size_t k = 0; k < ds.d; ++k)
                out_row[k] = static_cast<float>(nr > 0.0 ? row[k] / nr : row[k]);
        }
    }
    return ds;
}

DetectionReport detect(std::span<const double> debiased,
                       std::span<const std::uint8_t> labels, double threshold) {
    if (labels.empty()) throw MissingLabelsError("detect: ground-truth labels required");
    if (debiased.size() != labels.size())
        throw ShapeMismatchError("detect: scores and labels differ in length");

    DetectionReport rep;
    rep.threshold = threshold;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const bool classified_noisy = debiased[i] <= threshold;
        if (labels[i] == 0) {
            if (classified_noisy)
                ++rep.clean_as_noisy;
            else
                ++rep.clean_as_clean;
        } else {
            if (classified_noisy)
                ++rep.noisy_as_noisy;
            else
                ++rep.noisy_as_clean;
        }
    }
    const std::size_t clean_total = rep.clean_as_clean + rep.clean_as_noisy;
    const std::size_t noisy_total = rep.noisy_as_noisy + rep.noisy_as_clean;
    rep.accuracy = clean_total == 0 ? 100.0
                                    : 100.0 * static_cast<double>(rep.clean_as_clean) /
                                          static_cast<double>(clean_total);
    rep.recall = noisy_total == 0 ? 100.0
                                  : 100.0 * static_cast<double>(rep.noisy_as_noisy) /
                                        static_cast<double>(noisy_total);
    return rep;
}

double optimal_rank(std::size_t n, std::size_t m) {
    return static_cast<double>(n) - static_cast<double>(m - 1) / 2.0;
}

RankReport mean_noise_rank(std::span<const double> weights,
                           std::span<const std::uint8_t> labels) {
    if (labels.empty()) throw MissingLabelsError("mean_noise_rank: labels required");
    if (weights.size() != labels.size())
        throw ShapeMismatchError("mean_noise_rank: weights and labels differ in length");
    const std::size_t n = labels.size();

    std::size_t m = 0;
    for (std::uint8_t c : labels) m += (c == 1);
    if (m == 0) throw BadParamsError("mean_noise_rank: no noisy samples (m >= 1 required)");

    std::vector<std::uint32_t> order(n);
    std::iota(order.begin(), order.end(), 0u);
    std::sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
        if (weights[a] != weights[b]) return weights[a] > weights[b];
        return a < b;
    });

    double sum = 0.0;
    for (std::size_t rank = 1; rank <= n; ++rank)
        if (labels[order[rank - 1]] == 1) sum += static_cast<double>(rank);

    RankReport rep;
    rep.n = n;
    rep.m = m;
    rep.mean_noise_rank = sum / static_cast<double>(m);
    rep.optimal_rank = optimal_rank(n, m);
    return rep;
}

RankReport mean_noise_rank(const WeightVector& weights,
                           std::span<const std::uint8_t> labels) {
    return mean_noise_rank(std::span<const double>(weights.w), labels);
}

}  // namespace osa
