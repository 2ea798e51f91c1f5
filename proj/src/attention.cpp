#include "gafvit/attention.hpp"

#include "gafvit/error.hpp"

namespace gafvit::attention {

using autograd::Tape;
using autograd::Var;

ChannelAttentionParams ChannelAttentionParams::zeros(std::size_t channels, std::size_t reduction_ratio) {
    if (reduction_ratio == 0 || channels % reduction_ratio != 0)
        raise(Errc::InvalidArgument, "reduction ratio " + std::to_string(reduction_ratio) + " does not divide " +
                                         std::to_string(channels) + " channels");
    const std::size_t hidden = channels / reduction_ratio;
    return {Matrix(hidden, channels), Matrix(channels, hidden), reduction_ratio};
}

ChannelAttentionParams ChannelAttentionParams::random(std::size_t channels, std::size_t reduction_ratio,
                                                      std::mt19937_64& rng, double stddev) {
    auto p = zeros(channels, reduction_ratio);
    std::normal_distribution<double> dist(0.0, stddev);
    for (double& v : p.w1.data) v = dist(rng);
    for (double& v : p.w2.data) v = dist(rng);
    return p;
}

void ChannelAttentionParams::validate() const {
    const std::size_t c = w1.cols;
    if (reduction_ratio == 0 || c % reduction_ratio != 0)
        raise(Errc::DimensionMismatch, "reduction ratio does not divide the channel count");
    const std::size_t hidden = c / reduction_ratio;
    if (w1.rows != hidden || w2.rows != c || w2.cols != hidden)
        raise(Errc::DimensionMismatch, "attention weights do not match " + std::to_string(c) + " channels at ratio " +
                                           std::to_string(reduction_ratio));
    if (!w1.all_finite() || !w2.all_finite()) raise(Errc::NonFiniteInput, "attention weights are not finite");
}

std::vector<double> squeeze(const gaf::MultiChannelImage& image) {
    Tape tape(false);
    return squeeze(tape.constant(image.pixels)).value().data;
}

AttentionWeights excite(std::span<const double> squeezed, const ChannelAttentionParams& params) {
    params.validate();
    if (squeezed.size() != params.channels())
        raise(Errc::DimensionMismatch, "squeezed vector has " + std::to_string(squeezed.size()) + " entries for " +
                                           std::to_string(params.channels()) + " channels");
    Tape tape(false);
    Var u = tape.constant(Matrix::row_vector({squeezed.begin(), squeezed.end()}));
    return {excite(u, tape.constant(params.w1), tape.constant(params.w2)).value().data};
}

gaf::MultiChannelImage apply_weights(const gaf::MultiChannelImage& image, const AttentionWeights& weights) {
    if (weights.values.size() != image.channels())
        raise(Errc::DimensionMismatch, std::to_string(weights.values.size()) + " weights for " +
                                           std::to_string(image.channels()) + " channels");
    Tape tape(false);
    gaf::MultiChannelImage out = image;
    out.pixels = apply_weights(tape.constant(image.pixels), tape.constant(Matrix::row_vector(weights.values))).value();
    return out;
}

Var squeeze(Var pixels) { return autograd::col_mean(pixels); }

Var excite(Var squeezed, Var w1, Var w2) {
    return autograd::sigmoid(autograd::linear(autograd::relu(autograd::linear(squeezed, w1)), w2));
}

Var apply_weights(Var pixels, Var weights) { return autograd::scale_cols(pixels, weights); }

Var attend(Var pixels, Var w1, Var w2) { return apply_weights(pixels, excite(squeeze(pixels), w1, w2)); }

} // namespace gafvit::attention
