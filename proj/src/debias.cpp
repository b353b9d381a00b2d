#include "osa/debias.hpp"

#include <algorithm>
#include <cmath>

#include "osa/errors.hpp"
#include "osa/rng.hpp"
#include "osa/stats.hpp"

namespace osa {

std::string to_string(DebiasMethod m) {
    return m == DebiasMethod::Derangement ? "derangement" : "external-pairs";
}

std::uint64_t default_debias_k(std::size_t n) {
    return std::min<std::uint64_t>(10ull * n, 100000ull);
}

namespace {

double safe_pair_cosine(const PairDataset& ds, std::size_t i, std::size_t j, bool& ok) {
    double dot = 0.0, nx = 0.0, ny = 0.0;
    const auto xi = ds.x.row(i);
    const auto yj = ds.y.row(j);
    for (std::size_t m = 0; m < ds.d; ++m) {
        const double a = xi[m], b = yj[m];
        dot += a * b;
        nx += a * a;
        ny += b * b;
    }
    if (nx == 0.0 || ny == 0.0) {
        ok = false;
        return 0.0;
    }
    ok = true;
    return std::clamp(dot / (std::sqrt(nx) * std::sqrt(ny)), -1.0, 1.0);
}

}  // namespace

DebiasEstimate estimate_beta_derangement(const PairDataset& ds, std::uint64_t k,
                                         std::uint64_t seed) {
    ds.validate();
    if (ds.n < 2) throw TooFewPairsError("estimate_beta_derangement: need n >= 2");
    if (k < 2) throw TooFewPairsError("estimate_beta_derangement: need k >= 2");

    auto rng = substream(seed, "debias.derangement");
    std::uniform_int_distribution<std::size_t> pick(0, ds.n - 1);

    double mean = 0.0, m2 = 0.0;
    std::uint64_t taken = 0;
    std::uint64_t attempts = 0;
    const std::uint64_t max_attempts = 16 * k + 1024;
    while (taken < k) {
        if (++attempts > max_attempts)
            throw TooFewPairsError(
                "estimate_beta_derangement: could not draw enough non-degenerate pairs");
        const std::size_t i = pick(rng);
        std::size_t j = pick(rng);
        while (j == i) j = pick(rng);  // a self-pair is a clean pair; reject it
        bool ok = false;
        const double s = safe_pair_cosine(ds, i, j, ok);
        if (!ok) continue;  // zero row: uninformative, draw again
        ++taken;
        const double delta = s - mean;
        mean += delta / static_cast<double>(taken);
        m2 += delta * (s - mean);
    }

    DebiasEstimate est;
    est.beta = std::clamp(mean, -1.0, 1.0);
    est.k = k;
    est.variance = m2 / static_cast<double>(k - 1);
    est.seed = seed;
    est.method = DebiasMethod::Derangement;
    return est;
}

DebiasEstimate estimate_beta_external(const PairDataset& pairs, std::uint64_t seed) {
    pairs.validate();
    if (pairs.n < 2) throw TooFewPairsError("estimate_beta_external: need K >= 2 pairs");

    std::vector<double> s;
    s.reserve(pairs.n);
    for (std::size_t i = 0; i < pairs.n; ++i) {
        bool ok = false;
        const double v = safe_pair_cosine(pairs, i, i, ok);
        if (ok) s.push_back(v);
    }
    if (s.size() < 2)
        throw TooFewPairsError("estimate_beta_external: fewer than 2 non-degenerate pairs");

    const auto mv = mean_and_variance(s);
    DebiasEstimate est;
    est.beta = std::clamp(mv.mean, -1.0, 1.0);
    est.k = s.size();
    est.variance = mv.variance;
    est.seed = seed;
    est.method = DebiasMethod::ExternalPairs;
    return est;
}

}  // namespace osa
