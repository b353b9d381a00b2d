#pragma once

#include <cstdint>
#include <vector>

#include "osa/mat.hpp"

namespace osa {

/// Description of a random feed-forward network f_i(x) = relu(W_i x + b_i)
/// with W_i and b_i entries drawn from N(0, 1/d_out_i). When linear_last is
/// set, the final layer applies no activation (common-space projection).
struct RandomNetworkSpec {
    std::vector<std::size_t> widths;  // input dim, then output width per layer
    bool linear_last = false;
    std::uint64_t seed = 0;

    std::size_t layer_count() const { return widths.empty() ? 0 : widths.size() - 1; }
    std::size_t input_dim() const { return widths.empty() ? 0 : widths.front(); }
    std::size_t output_dim() const { return widths.empty() ? 0 : widths.back(); }

    /// layers equal-width layers on top of an input of the same width.
    static RandomNetworkSpec uniform(std::size_t layers, std::size_t width,
                                     bool linear_last, std::uint64_t seed);

    void validate() const;  // throws BadParamsError
};

/// Materialized weights of a RandomNetworkSpec.
class RandomNetwork {
public:
    explicit RandomNetwork(RandomNetworkSpec spec);

    const RandomNetworkSpec& spec() const { return spec_; }
    std::size_t layer_count() const { return spec_.layer_count(); }

    /// Applies layer `l` to a batch of row vectors (rows x d_in_l).
    MatD apply_layer(const MatD& input, std::size_t l) const;

    /// Applies all layers.
    MatD forward(const MatD& input) const;

private:
    RandomNetworkSpec spec_;
    std::vector<MatD> weights_;               // per layer, out x in
    std::vector<std::vector<double>> biases_; // per layer, out
};

}  // namespace osa
