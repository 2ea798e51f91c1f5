#pragma once

// Squeeze-excitation channel attention: per-channel global average pooling,
// a bias-free two-layer gate U = sigmoid(W2 relu(W1 u)), then channel scaling.

#include "gafvit/autograd.hpp"
#include "gafvit/gaf.hpp"

#include <random>
#include <span>
#include <vector>

namespace gafvit::attention {

struct ChannelAttentionParams {
    Matrix w1; // (C / ratio) x C
    Matrix w2; // C x (C / ratio)
    std::size_t reduction_ratio = 1;

    static ChannelAttentionParams zeros(std::size_t channels, std::size_t reduction_ratio = 1);
    static ChannelAttentionParams random(std::size_t channels, std::size_t reduction_ratio, std::mt19937_64& rng,
                                         double stddev = 0.02);

    std::size_t channels() const noexcept { return w1.cols; }
    void validate() const;
};

struct AttentionWeights {
    std::vector<double> values;
};

inline constexpr double kInitStddev = 0.02;

std::vector<double> squeeze(const gaf::MultiChannelImage& image);
AttentionWeights excite(std::span<const double> squeezed, const ChannelAttentionParams& params);
gaf::MultiChannelImage apply_weights(const gaf::MultiChannelImage& image, const AttentionWeights& weights);

// Differentiable forms. `pixels` is the (H * W) x C image matrix.
autograd::Var squeeze(autograd::Var pixels);
autograd::Var excite(autograd::Var squeezed, autograd::Var w1, autograd::Var w2);
autograd::Var apply_weights(autograd::Var pixels, autograd::Var weights);
// squeeze -> excite -> apply_weights.
autograd::Var attend(autograd::Var pixels, autograd::Var w1, autograd::Var w2);

} // namespace gafvit::attention
