#pragma once

// Multi-channel Vision Transformer: patch embedding with a class token and
// learned positions, L pre-norm blocks (MSA then MLP, each residual), and a
// layer-normed class token fed to an affine head.

#include "gafvit/autograd.hpp"
#include "gafvit/gaf.hpp"
#include "gafvit/params.hpp"

#include <memory>
#include <string>
#include <vector>

namespace gafvit::vit {

using autograd::Var;

enum class PatchMode {
    // Full-width bands of P rows; N = H / P.
    StripRows,
    // P x P squares in raster order; N = H W / P^2.
    Square,
};

std::string to_string(PatchMode mode);
PatchMode patch_mode_from_string(const std::string& s);

struct VitConfig {
    std::size_t image_h = 99;
    std::size_t image_w = 99;
    std::size_t channels = 6;
    PatchMode patch_mode = PatchMode::StripRows;
    std::size_t patch_size = 9;
    std::size_t embed_dim = 128;
    std::size_t depth = 4;
    std::size_t heads = 4;
    std::size_t mlp_dim = 128;
    std::size_t num_classes = 4;

    std::size_t num_patches() const;
    std::size_t patch_dim() const;
    std::size_t head_dim() const { return embed_dim / heads; }
    // Throws IndivisibleImage or DimensionMismatch.
    void validate() const;
};

inline constexpr double kLayerNormEps = 1e-9;
inline constexpr double kInitStddev = 0.02;

// Rows are patches, each flattened in (row, column, channel) order.
Matrix patchify(const gaf::MultiChannelImage& image, const VitConfig& config);
Var patchify(Var pixels, const VitConfig& config);
// Source offsets into the (H * W) x C pixel matrix, one per patch element.
std::shared_ptr<const std::vector<std::size_t>> patch_index(const VitConfig& config);

struct BlockWeights {
    Var ln1_gamma, ln1_beta;
    Var q, q_bias, k, k_bias, v, v_bias, out, out_bias; // D x D, 1 x D
    Var ln2_gamma, ln2_beta;
    Var fc1, fc1_bias; // mlp x D, 1 x mlp
    Var fc2, fc2_bias; // D x mlp, 1 x D
};

struct VitWeights {
    Var patch_w, patch_b; // D x patch_dim, 1 x D
    Var class_token;      // 1 x D
    Var pos_embed;        // (N + 1) x D
    std::vector<BlockWeights> blocks;
    Var norm_gamma, norm_beta;
    Var head_w, head_b; // classes x D, 1 x classes
};

// Softmax matrices captured from msa_block, one per head per call.
struct AttentionProbe {
    std::vector<Matrix> probabilities;
};

std::string block_prefix(std::size_t index);
// Adds every ViT parameter under "vit." with the standard initialization.
void add_parameters(ParamStore& store, const VitConfig& config, std::mt19937_64& rng);
// Binds the stored parameters onto a tape.
VitWeights bind(autograd::Tape& tape, ParamStore& store, const VitConfig& config);

Var embed_tokens(Var patches, const VitWeights& weights);
Var msa_block(Var tokens, const BlockWeights& block, std::size_t heads, AttentionProbe* probe = nullptr);
Var mlp_block(Var tokens, const BlockWeights& block);
Var encode(Var tokens, const VitWeights& weights, std::size_t heads, AttentionProbe* probe = nullptr);
// Layer norm of the class token followed by the head.
Var classify(Var tokens, const VitWeights& weights);
// patchify -> embed_tokens -> encode -> classify on an already scaled image.
Var forward(Var pixels, const VitWeights& weights, const VitConfig& config, AttentionProbe* probe = nullptr);

} // namespace gafvit::vit
