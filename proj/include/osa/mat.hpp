#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace osa {

/// Minimal dense row-major matrix. Embeddings are stored as Mat<float>;
/// all internal accumulation happens in double.
template <typename T>
struct Mat {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<T> data;

    Mat() = default;
    Mat(std::size_t r, std::size_t c, T fill = T{}) : rows(r), cols(c), data(r * c, fill) {}

    T& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
    const T& operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }

    std::span<T> row(std::size_t i) { return {data.data() + i * cols, cols}; }
    std::span<const T> row(std::size_t i) const { return {data.data() + i * cols, cols}; }

    bool operator==(const Mat&) const = default;
};

using MatF = Mat<float>;
using MatD = Mat<double>;

}  // namespace osa
