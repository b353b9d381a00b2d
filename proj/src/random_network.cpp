#include "osa/random_network.hpp"

#include <cmath>
#include <random>

#include "osa/errors.hpp"
#include "osa/rng.hpp"

namespace osa {

RandomNetworkSpec RandomNetworkSpec::uniform(std::size_t layers, std::size_t width,
                                             bool linear_last, std::uint64_t seed) {
    RandomNetworkSpec spec;
    spec.widths.assign(layers + 1, width);
    spec.linear_last = linear_last;
    spec.seed = seed;
    return spec;
}

void RandomNetworkSpec::validate() const {
    if (layer_count() < 1)
        throw BadParamsError("RandomNetworkSpec: need at least one layer");
    for (std::size_t w : widths)
        if (w == 0) throw BadParamsError("RandomNetworkSpec: widths must be positive");
}

RandomNetwork::RandomNetwork(RandomNetworkSpec spec) : spec_(std::move(spec)) {
    spec_.validate();
    const std::size_t t = spec_.layer_count();
    weights_.reserve(t);
    biases_.reserve(t);
    for (std::size_t l = 0; l < t; ++l) {
        const std::size_t d_in = spec_.widths[l];
        const std::size_t d_out = spec_.widths[l + 1];
        const double sigma = 1.0 / std::sqrt(static_cast<double>(d_out));
        std::normal_distribution<double> nd(0.0, sigma);

        auto wrng = substream(spec_.seed, "net.weight", l);
        MatD w(d_out, d_in);
        for (double& v : w.data) v = nd(wrng);
        weights_.push_back(std::move(w));

        auto brng = substream(spec_.seed, "net.bias", l);
        std::vector<double> b(d_out);
        for (double& v : b) v = nd(brng);
        biases_.push_back(std::move(b));
    }
}

MatD RandomNetwork::apply_layer(const MatD& input, std::size_t l) const {
    if (l >= layer_count()) throw BadParamsError("apply_layer: layer index out of range");
    const MatD& w = weights_[l];
    const auto& b = biases_[l];
    if (input.cols != w.cols)
        throw ShapeMismatchError("apply_layer: input dim " + std::to_string(input.cols) +
                                 " != layer input dim " + std::to_string(w.cols));

    const bool relu = !(spec_.linear_last && l + 1 == layer_count());
    MatD out(input.rows, w.rows);
    for (std::size_t i = 0; i < input.rows; ++i) {
        const auto in_row = input.row(i);
        for (std::size_t j = 0; j < w.rows; ++j) {
            const auto w_row = w.row(j);
            double acc = b[j];
            for (std::size_t k = 0; k < w.cols; ++k) acc += in_row[k] * w_row[k];
            out(i, j) = relu && acc < 0.0 ? 0.0 : acc;
        }
    }
    return out;
}

MatD RandomNetwork::forward(const MatD& input) const {
    MatD cur = input;
    for (std::size_t l = 0; l < layer_count(); ++l) cur = apply_layer(cur, l);
    return cur;
}

}  // namespace osa
