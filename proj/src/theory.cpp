#include "osa/theory.hpp"

#include <algorithm>
#include <cmath>

#include "osa/errors.hpp"
#include "osa/parallel.hpp"
#include "osa/rng.hpp"
#include "osa/sampling.hpp"
#include "osa/stats.hpp"

namespace osa {

double ortho_prob_analytic(std::size_t d, double a) {
    if (d < 1) throw BadParamsError("ortho_prob_analytic: d >= 1 required");
    if (!(a > 0.0) || a > 1.0) throw BadParamsError("ortho_prob_analytic: a in (0, 1] required");
    return normal_central_prob(a * std::sqrt(static_cast<double>(d)));
}

double ortho_prob_montecarlo(std::size_t d, double a, std::size_t trials,
                             std::uint64_t seed, int threads) {
    if (d < 1) throw BadParamsError("ortho_prob_montecarlo: d >= 1 required");
    if (!(a > 0.0) || a > 1.0)
        throw BadParamsError("ortho_prob_montecarlo: a in (0, 1] required");
    if (trials < 1000) throw BadParamsError("ortho_prob_montecarlo: trials >= 1000 required");

    const std::size_t n_blocks = std::min<std::size_t>(trials, 256);
    std::vector<std::uint64_t> hits(n_blocks, 0);
    parallel_blocks(trials, n_blocks, threads,
                    [&](std::size_t block, std::size_t lo, std::size_t hi) {
                        std::vector<double> u(d), v(d);
                        std::uint64_t h = 0;
                        for (std::size_t t = lo; t < hi; ++t) {
                            auto rng = substream(seed, "ortho.trial", t);
                            std::normal_distribution<double> nd(0.0, 1.0);
                            double dot = 0.0, nu = 0.0, nv = 0.0;
                            for (std::size_t i = 0; i < d; ++i) {
                                u[i] = nd(rng);
                                v[i] = nd(rng);
                            }
                            for (std::size_t i = 0; i < d; ++i) {
                                dot += u[i] * v[i];
                                nu += u[i] * u[i];
                                nv += v[i] * v[i];
                            }
                            const double c = dot / (std::sqrt(nu) * std::sqrt(nv));
                            if (std::fabs(c) <= a) ++h;
                        }
                        hits[block] = h;
                    });
    std::uint64_t total = 0;
    for (std::uint64_t h : hits) total += h;
    return static_cast<double>(total) / static_cast<double>(trials);
}

namespace {

// Cosine between two rows of a matrix; a zeroed-out vector (possible in
// principle after ReLU) is reported as cosine 0.
double row_cosine(const MatD& m, std::size_t i, std::size_t j) {
    double dot = 0.0, ni = 0.0, nj = 0.0;
    const auto a = m.row(i);
    const auto b = m.row(j);
    for (std::size_t k = 0; k < m.cols; ++k) {
        dot += a[k] * b[k];
        ni += a[k] * a[k];
        nj += b[k] * b[k];
    }
    if (ni == 0.0 || nj == 0.0) return 0.0;
    return std::clamp(dot / (std::sqrt(ni) * std::sqrt(nj)), -1.0, 1.0);
}

}  // namespace

PairTriple make_triple(std::size_t d, double clean_cos, double random_cos,
                       double noisy_cos, std::mt19937_64& rng) {
    if (d < 2) throw BadParamsError("make_triple: need d >= 2");
    for (double c : {clean_cos, random_cos, noisy_cos})
        if (!(c >= -1.0 && c <= 1.0))
            throw BadParamsError("make_triple: cosines must lie in [-1, 1]");

    // All three pairs are placed symmetrically in one random 2-plane:
    // u = a m + b w, v = a m - b w with a^2 - b^2 equal to the target
    // cosine. Sharing (m, w) is common-random-numbers variance reduction for
    // the ordering comparison, and the mirror placement makes each cosine
    // second-order in transverse propagation noise. Norms are sqrt(d), the
    // natural scale of a Gaussian draw; at unit norm the layer bias (norm
    // ~ 1) would drown the signal.
    const std::vector<double> m = unit_sphere_vector(d, rng);
    std::vector<double> w;
    for (;;) {
        w = unit_sphere_vector(d, rng);
        double dot = 0.0;
        for (std::size_t k = 0; k < d; ++k) dot += w[k] * m[k];
        for (std::size_t k = 0; k < d; ++k) w[k] -= dot * m[k];
        const double nw = norm2(w);
        if (nw > 1e-9) {
            for (double& x : w) x /= nw;
            break;
        }
    }

    const double scale = std::sqrt(static_cast<double>(d));
    auto build = [&](double c, std::vector<double>& u, std::vector<double>& v) {
        const double a = std::sqrt((1.0 + c) / 2.0);
        const double b = std::sqrt((1.0 - c) / 2.0);
        u.resize(d);
        v.resize(d);
        for (std::size_t k = 0; k < d; ++k) {
            u[k] = (a * m[k] + b * w[k]) * scale;
            v[k] = (a * m[k] - b * w[k]) * scale;
        }
    };
    PairTriple t;
    build(clean_cos, t.clean_u, t.clean_v);
    build(random_cos, t.rand_u, t.rand_v);
    build(noisy_cos, t.noisy_u, t.noisy_v);
    return t;
}

PropagationTrace propagate(const RandomNetworkSpec& spec, const PairTriple& triple,
                           std::size_t beta_pool_pairs, std::uint64_t pool_seed) {
    spec.validate();
    const std::size_t d = spec.input_dim();
    for (const auto* v : {&triple.clean_u, &triple.clean_v, &triple.rand_u, &triple.rand_v,
                          &triple.noisy_u, &triple.noisy_v})
        if (v->size() != d)
            throw ShapeMismatchError("propagate: triple dimension != network input dim");

    // Stack triple and pool into one batch: rows 0..5 are the triple, then
    // pool pairs as consecutive row pairs.
    const std::size_t rows = 6 + 2 * beta_pool_pairs;
    MatD batch(rows, d);
    auto put = [&](std::size_t r, const std::vector<double>& v) {
        std::copy(v.begin(), v.end(), batch.row(r).begin());
    };
    put(0, triple.clean_u);
    put(1, triple.clean_v);
    put(2, triple.rand_u);
    put(3, triple.rand_v);
    put(4, triple.noisy_u);
    put(5, triple.noisy_v);
    // Pool pairs are raw standard-Gaussian draws: independent, cosine
    // concentrated near zero, and at the norm scale the layers expect.
    auto pool_rng = substream(pool_seed, "propagate.pool");
    for (std::size_t p = 0; p < 2 * beta_pool_pairs; ++p)
        fill_gaussian(batch.row(6 + p), pool_rng);

    PropagationTrace trace;
    trace.pool_pairs = beta_pool_pairs;
    auto record = [&](const MatD& m) {
        trace.clean.push_back(row_cosine(m, 0, 1));
        trace.random.push_back(row_cosine(m, 2, 3));
        trace.noisy.push_back(row_cosine(m, 4, 5));
        double sum = 0.0;
        for (std::size_t p = 0; p < beta_pool_pairs; ++p)
            sum += row_cosine(m, 6 + 2 * p, 7 + 2 * p);
        trace.beta.push_back(beta_pool_pairs ? sum / static_cast<double>(beta_pool_pairs)
                                             : 0.0);
    };

    RandomNetwork net(spec);
    record(batch);
    MatD cur = std::move(batch);
    for (std::size_t l = 0; l < net.layer_count(); ++l) {
        cur = net.apply_layer(cur, l);
        record(cur);
    }
    return trace;
}

ConeSimulationResult simulate_cone(const ConeSimulationConfig& cfg) {
    if (cfg.trials < 1) throw BadParamsError("simulate_cone: trials >= 1 required");
    if (cfg.layers < 1 || cfg.width < 2)
        throw BadParamsError("simulate_cone: need layers >= 1 and width >= 2");
    if (!(cfg.noisy_cos < 0.0 && 0.0 < cfg.clean_cos))
        throw BadParamsError("simulate_cone: expected noisy_cos < 0 < clean_cos");

    const std::size_t depth = cfg.layers + 1;
    struct Partial {
        std::vector<double> beta, clean, random, noisy;
        std::uint64_t ordered = 0;
    };
    const std::size_t n_blocks = std::min<std::size_t>(cfg.trials, 64);
    std::vector<Partial> partials(n_blocks);

    parallel_blocks(cfg.trials, n_blocks, cfg.threads,
                    [&](std::size_t block, std::size_t lo, std::size_t hi) {
                        Partial p;
                        p.beta.assign(depth, 0.0);
                        p.clean.assign(depth, 0.0);
                        p.random.assign(depth, 0.0);
                        p.noisy.assign(depth, 0.0);
                        for (std::size_t t = lo; t < hi; ++t) {
                            RandomNetworkSpec spec = RandomNetworkSpec::uniform(
                                cfg.layers, cfg.width, /*linear_last=*/false,
                                derive_seed(cfg.seed, "cone.net", t));
                            auto trng = substream(cfg.seed, "cone.triple", t);
                            const PairTriple triple = make_triple(
                                cfg.width, cfg.clean_cos, 0.0, cfg.noisy_cos, trng);
                            const PropagationTrace tr =
                                propagate(spec, triple, cfg.pool_pairs_per_trial,
                                          derive_seed(cfg.seed, "cone.pool", t));
                            for (std::size_t i = 0; i < depth; ++i) {
                                p.beta[i] += tr.beta[i];
                                p.clean[i] += tr.clean[i];
                                p.random[i] += tr.random[i];
                                p.noisy[i] += tr.noisy[i];
                            }
                            if (tr.clean.back() > tr.random.back() &&
                                tr.random.back() > tr.noisy.back())
                                ++p.ordered;
                        }
                        partials[block] = std::move(p);
                    });

    ConeSimulationResult out;
    out.trials = cfg.trials;
    out.mean_beta.assign(depth, 0.0);
    out.mean_clean.assign(depth, 0.0);
    out.mean_random.assign(depth, 0.0);
    out.mean_noisy.assign(depth, 0.0);
    std::uint64_t ordered = 0;
    for (const Partial& p : partials) {
        if (p.beta.empty()) continue;
        for (std::size_t i = 0; i < depth; ++i) {
            out.mean_beta[i] += p.beta[i];
            out.mean_clean[i] += p.clean[i];
            out.mean_random[i] += p.random[i];
            out.mean_noisy[i] += p.noisy[i];
        }
        ordered += p.ordered;
    }
    const double nt = static_cast<double>(cfg.trials);
    for (std::size_t i = 0; i < depth; ++i) {
        out.mean_beta[i] /= nt;
        out.mean_clean[i] /= nt;
        out.mean_random[i] /= nt;
        out.mean_noisy[i] /= nt;
    }
    out.ordering_preserved_rate = static_cast<double>(ordered) / nt;
    return out;
}

GaussianityReport gaussianity_report(const RandomNetworkSpec& spec, InputDistribution dist,
                                     std::size_t samples, std::uint64_t seed, int threads) {
    spec.validate();
    if (!spec.linear_last)
        throw BadParamsError("gaussianity_report: final layer must be linear");
    if (samples < 100) throw BadParamsError("gaussianity_report: samples >= 100 required");

    const RandomNetwork net(spec);
    const std::size_t d_in = spec.input_dim();
    const std::size_t d_out = spec.output_dim();
    const std::size_t t = spec.layer_count();
    const std::size_t last_in = spec.widths[t - 1];

    struct Partial {
        std::vector<double> s1, s2, s3, s4;  // per output coordinate
        double last_sum = 0.0, last_sq = 0.0;
        std::uint64_t last_count = 0;
    };
    const std::size_t block_samples = 1024;
    const std::size_t n_blocks = (samples + block_samples - 1) / block_samples;
    std::vector<Partial> partials(n_blocks);

    parallel_blocks(samples, n_blocks, threads,
                    [&](std::size_t block, std::size_t lo, std::size_t hi) {
                        Partial p;
                        p.s1.assign(d_out, 0.0);
                        p.s2.assign(d_out, 0.0);
                        p.s3.assign(d_out, 0.0);
                        p.s4.assign(d_out, 0.0);

                        auto rng = substream(seed, "gauss.input", block);
                        std::normal_distribution<double> gauss(0.0, 1.0);
                        std::uniform_real_distribution<double> uni(0.0, 1.0);

                        MatD in(hi - lo, d_in);
                        for (double& v : in.data)
                            v = dist == InputDistribution::Uniform ? uni(rng) : gauss(rng);

                        // All layers except the last, then capture the final
                        // layer's input statistics before projecting.
                        MatD cur = std::move(in);
                        for (std::size_t l = 0; l + 1 < t; ++l) cur = net.apply_layer(cur, l);
                        for (double v : cur.data) {
                            p.last_sum += v;
                            p.last_sq += v * v;
                        }
                        p.last_count = cur.data.size();
                        const MatD out = net.apply_layer(cur, t - 1);

                        for (std::size_t i = 0; i < out.rows; ++i) {
                            const auto row = out.row(i);
                            for (std::size_t j = 0; j < d_out; ++j) {
                                const double v = row[j];
                                const double v2 = v * v;
                                p.s1[j] += v;
                                p.s2[j] += v2;
                                p.s3[j] += v2 * v;
                                p.s4[j] += v2 * v2;
                            }
                        }
                        partials[block] = std::move(p);
                    });

    std::vector<double> s1(d_out, 0.0), s2(d_out, 0.0), s3(d_out, 0.0), s4(d_out, 0.0);
    double last_sum = 0.0, last_sq = 0.0;
    std::uint64_t last_count = 0;
    for (const Partial& p : partials) {
        if (p.s1.empty()) continue;
        for (std::size_t j = 0; j < d_out; ++j) {
            s1[j] += p.s1[j];
            s2[j] += p.s2[j];
            s3[j] += p.s3[j];
            s4[j] += p.s4[j];
        }
        last_sum += p.last_sum;
        last_sq += p.last_sq;
        last_count += p.last_count;
    }

    GaussianityReport rep;
    rep.samples = samples;
    rep.mean.resize(d_out);
    rep.variance.resize(d_out);
    rep.skewness.resize(d_out);
    rep.excess_kurtosis.resize(d_out);
    double var_sum = 0.0;
    for (std::size_t j = 0; j < d_out; ++j) {
        const MomentSummary m = moments_from_sums(samples, s1[j], s2[j], s3[j], s4[j]);
        rep.mean[j] = m.mean;
        rep.variance[j] = m.variance;
        rep.skewness[j] = m.skewness;
        rep.excess_kurtosis[j] = m.excess_kurtosis;
        var_sum += m.variance;
        rep.max_abs_skewness = std::max(rep.max_abs_skewness, std::fabs(m.skewness));
        rep.max_abs_excess_kurtosis =
            std::max(rep.max_abs_excess_kurtosis, std::fabs(m.excess_kurtosis));
    }
    rep.mean_empirical_variance = var_sum / static_cast<double>(d_out);

    double all1 = 0.0, all2 = 0.0;
    for (std::size_t j = 0; j < d_out; ++j) {
        all1 += s1[j];
        all2 += s2[j];
    }
    const double cells = static_cast<double>(samples) * static_cast<double>(d_out);
    const double pooled_mean = all1 / cells;
    rep.pooled_variance = all2 / cells - pooled_mean * pooled_mean;

    const double mu_x = last_sum / static_cast<double>(last_count);
    const double var_x = last_sq / static_cast<double>(last_count) - mu_x * mu_x;
    const double sigma_sq = 1.0 / static_cast<double>(d_out);  // weight/bias variance rule
    rep.theoretical_variance =
        static_cast<double>(last_in) * sigma_sq * (var_x + mu_x * mu_x) + sigma_sq;
    return rep;
}

}  // namespace osa
