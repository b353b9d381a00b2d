#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "osa/mat.hpp"

namespace osa {

/// Paired embedding matrices with optional ground-truth noise labels.
/// Label convention: 0 = clean, 1 = noisy.
struct PairDataset {
    std::size_t n = 0;  // number of pairs
    std::size_t d = 0;  // embedding dimension
    MatF x;             // n x d, first view
    MatF y;             // n x d, second view
    std::vector<std::uint8_t> labels;  // empty, or size n with values {0,1}

    bool has_labels() const { return !labels.empty(); }

    /// Throws BadParamsError if the shape/label invariants are violated.
    void validate() const;
};

/// Cosine similarity (u.v)/(|u||v|), accumulated in double in index order and
/// clamped to [-1, 1]. Throws ZeroVectorError when either norm is zero.
double cosine_similarity(std::span<const float> u, std::span<const float> v);
double cosine_similarity(std::span<const double> u, std::span<const double> v);

struct NormalizeResult {
    PairDataset ds;
    std::size_t zero_rows = 0;  // rows left unchanged because their norm was 0
};

/// Rescales every nonzero row of x and y to unit Euclidean norm. Zero rows
/// are kept as-is and counted as warnings.
NormalizeResult normalize(const PairDataset& ds);

struct SimilarityMatrix {
    MatD m;                  // rows x n, m(i,j) = s(x_{row_begin+i}, y_j)
    std::size_t row_begin = 0;
};

struct IndexRange {
    std::size_t begin = 0;
    std::size_t end = 0;  // half-open
};

/// Full (or row-blocked) cosine similarity matrix. Row blocks may be computed
/// in parallel; each dot product is summed sequentially in index order, so the
/// result is identical for any thread count.
SimilarityMatrix similarity_matrix(const PairDataset& ds,
                                   std::optional<IndexRange> rows = std::nullopt,
                                   int threads = 1);

struct PairSimilarities {
    std::vector<double> s;                    // s(x_i, y_i); 0 for degenerate pairs
    std::vector<std::uint32_t> degenerate;    // indices where either row had norm 0
};

/// Diagonal similarities s(x_i, y_i). Degenerate (zero-norm) pairs are
/// reported instead of throwing; callers decide policy.
PairSimilarities pair_similarities(const PairDataset& ds);

}  // namespace osa
