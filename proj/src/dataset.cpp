#include "osa/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "osa/errors.hpp"
#include "osa/parallel.hpp"

namespace osa {

void PairDataset::validate() const {
    if (n < 1 || d < 1) throw BadParamsError("dataset requires n >= 1 and d >= 1");
    if (x.rows != n || x.cols != d || y.rows != n || y.cols != d)
        throw ShapeMismatchError("x and y must both be n x d");
    if (!labels.empty()) {
        if (labels.size() != n) throw ShapeMismatchError("labels must have length n");
        for (std::uint8_t c : labels)
            if (c > 1) throw BadParamsError("labels must contain only 0 or 1");
    }
}

namespace {

template <typename T>
double cosine_impl(std::span<const T> u, std::span<const T> v) {
    if (u.size() != v.size()) throw ShapeMismatchError("cosine_similarity: length mismatch");
    double dot = 0.0, nu = 0.0, nv = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        const double a = static_cast<double>(u[i]);
        const double b = static_cast<double>(v[i]);
        dot += a * b;
        nu += a * a;
        nv += b * b;
    }
    if (nu == 0.0 || nv == 0.0)
        throw ZeroVectorError("cosine_similarity: zero-norm input vector");
    const double s = dot / (std::sqrt(nu) * std::sqrt(nv));
    return std::clamp(s, -1.0, 1.0);
}

// Sequential, index-order double accumulation; the fixed order keeps matrix
// results bit-identical across thread counts.
double dot_f(std::span<const float> u, std::span<const float> v) {
    double dot = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i)
        dot += static_cast<double>(u[i]) * static_cast<double>(v[i]);
    return dot;
}

double row_norm(std::span<const float> r) {
    double s = 0.0;
    for (float v : r) s += static_cast<double>(v) * static_cast<double>(v);
    return std::sqrt(s);
}

}  // namespace

double cosine_similarity(std::span<const float> u, std::span<const float> v) {
    return cosine_impl(u, v);
}

double cosine_similarity(std::span<const double> u, std::span<const double> v) {
    return cosine_impl(u, v);
}

NormalizeResult normalize(const PairDataset& ds) {
    ds.validate();
    NormalizeResult out;
    out.ds = ds;
    for (MatF* m : {&out.ds.x, &out.ds.y}) {
        for (std::size_t i = 0; i < m->rows; ++i) {
            auto r = m->row(i);
            const double norm = row_norm(r);
            if (norm == 0.0) {
                ++out.zero_rows;
                continue;
            }
            for (float& v : r) v = static_cast<float>(static_cast<double>(v) / norm);
        }
    }
    return out;
}

SimilarityMatrix similarity_matrix(const PairDataset& ds, std::optional<IndexRange> rows,
                                   int threads) {
    ds.validate();
    IndexRange range{0, ds.n};
    if (rows) {
        if (rows->begin > rows->end || rows->end > ds.n)
            throw BadParamsError("similarity_matrix: block out of range [0, n)");
        range = *rows;
    }
    const std::size_t n_rows = range.end - range.begin;

    SimilarityMatrix out;
    out.row_begin = range.begin;
    out.m = MatD(n_rows, ds.n);
    if (n_rows == 0) return out;

    // Zero rows are legal dataset content (normalize() warns about them); a
    // similarity against one is undefined, so surface the error eagerly.
    for (std::size_t i = 0; i < ds.n; ++i)
        if (row_norm(ds.x.row(i)) == 0.0 || row_norm(ds.y.row(i)) == 0.0)
            throw ZeroVectorError("similarity_matrix: dataset contains a zero row at index " +
                                  std::to_string(i));

    parallel_blocks(n_rows, std::max<std::size_t>(n_rows / 16, 1), threads,
                    [&](std::size_t, std::size_t lo, std::size_t hi) {
                        for (std::size_t i = lo; i < hi; ++i) {
                            const auto xi = ds.x.row(range.begin + i);
                            const double nx = row_norm(xi);
                            for (std::size_t j = 0; j < ds.n; ++j) {
                                const auto yj = ds.y.row(j);
                                const double s = dot_f(xi, yj) / (nx * row_norm(yj));
                                out.m(i, j) = std::clamp(s, -1.0, 1.0);
                            }
                        }
                    });
    return out;
}

PairSimilarities pair_similarities(const PairDataset& ds) {
    ds.validate();
    PairSimilarities out;
    out.s.resize(ds.n, 0.0);
    for (std::size_t i = 0; i < ds.n; ++i) {
        const auto xi = ds.x.row(i);
        const auto yi = ds.y.row(i);
        const double nx = row_norm(xi), ny = row_norm(yi);
        if (nx == 0.0 || ny == 0.0) {
            out.degenerate.push_back(static_cast<std::uint32_t>(i));
            continue;
        }
        out.s[i] = std::clamp(dot_f(xi, yi) / (nx * ny), -1.0, 1.0);
    }
    return out;
}

}  // namespace osa
