#include "gafvit/vit.hpp"

#include "gafvit/error.hpp"

#include <cmath>

namespace gafvit::vit {

namespace ag = autograd;

std::string to_string(PatchMode mode) { return mode == PatchMode::StripRows ? "strip" : "square"; }

PatchMode patch_mode_from_string(const std::string& s) {
    if (s == "strip" || s == "strip-rows") return PatchMode::StripRows;
    if (s == "square") return PatchMode::Square;
    raise(Errc::InvalidArgument, "unknown patch mode '" + s + "' (expected strip or square)");
}

std::size_t VitConfig::num_patches() const {
    if (patch_mode == PatchMode::StripRows) return image_h / patch_size;
    return (image_h / patch_size) * (image_w / patch_size);
}

std::size_t VitConfig::patch_dim() const {
    if (patch_mode == PatchMode::StripRows) return patch_size * image_w * channels;
    return patch_size * patch_size * channels;
}

void VitConfig::validate() const {
    if (patch_size == 0) raise(Errc::IndivisibleImage, "patch size must be positive");
    if (image_h % patch_size != 0)
        raise(Errc::IndivisibleImage, "image height " + std::to_string(image_h) + " is not divisible by patch size " +
                                          std::to_string(patch_size));
    if (patch_mode == PatchMode::Square && image_w % patch_size != 0)
        raise(Errc::IndivisibleImage, "image width " + std::to_string(image_w) + " is not divisible by patch size " +
                                          std::to_string(patch_size));
    if (heads == 0 || embed_dim % heads != 0)
        raise(Errc::DimensionMismatch, "embedding dim " + std::to_string(embed_dim) + " is not divisible by " +
                                           std::to_string(heads) + " heads");
    if (channels == 0 || num_classes == 0 || mlp_dim == 0)
        raise(Errc::DimensionMismatch, "channels, classes and mlp dim must be positive");
}

std::shared_ptr<const std::vector<std::size_t>> patch_index(const VitConfig& config) {
    config.validate();
    const std::size_t w = config.image_w, c = config.channels, p = config.patch_size;
    auto index = std::make_shared<std::vector<std::size_t>>();
    index->reserve(config.num_patches() * config.patch_dim());
    if (config.patch_mode == PatchMode::StripRows) {
        for (std::size_t i = 0; i < config.image_h * w * c; ++i) index->push_back(i);
        return index;
    }
    for (std::size_t pr = 0; pr < config.image_h / p; ++pr)
        for (std::size_t pc = 0; pc < w / p; ++pc)
            for (std::size_t r = 0; r < p; ++r)
                for (std::size_t col = 0; col < p; ++col)
                    for (std::size_t ch = 0; ch < c; ++ch)
                        index->push_back(((pr * p + r) * w + pc * p + col) * c + ch);
    return index;
}

namespace {

void check_image(const VitConfig& config, std::size_t rows, std::size_t cols) {
    if (rows != config.image_h * config.image_w || cols != config.channels)
        raise(Errc::DimensionMismatch, "image with " + std::to_string(rows) + " pixels x " + std::to_string(cols) +
                                           " channels does not match the configured " + std::to_string(config.image_h) +
                                           "x" + std::to_string(config.image_w) + "x" + std::to_string(config.channels));
}

} // namespace

Matrix patchify(const gaf::MultiChannelImage& image, const VitConfig& config) {
    config.validate();
    if (image.height != config.image_h || image.width != config.image_w)
        raise(Errc::DimensionMismatch, "image size differs from the configuration");
    ag::Tape tape(false);
    return patchify(tape.constant(image.pixels), config).value();
}

Var patchify(Var pixels, const VitConfig& config) {
    config.validate();
    check_image(config, pixels.rows(), pixels.cols());
    // Strip patches are contiguous in the row-major H x W x C layout.
    if (config.patch_mode == PatchMode::StripRows)
        return ag::reshape(pixels, config.num_patches(), config.patch_dim());
    return ag::gather(pixels, patch_index(config), config.num_patches(), config.patch_dim());
}

std::string block_prefix(std::size_t index) { return "vit.block" + std::to_string(index) + "."; }

void add_parameters(ParamStore& store, const VitConfig& config, std::mt19937_64& rng) {
    config.validate();
    const std::size_t d = config.embed_dim;
    auto normal = [&](const std::string& name, std::size_t r, std::size_t c) {
        init_normal(store.add(name, r, c), rng, kInitStddev);
    };
    auto ones = [&](const std::string& name, std::size_t c) { init_constant(store.add(name, 1, c), 1.0); };
    auto zeros = [&](const std::string& name, std::size_t c) { store.add(name, 1, c); };

    normal("vit.patch_embed.w", d, config.patch_dim());
    zeros("vit.patch_embed.b", d);
    normal("vit.class_token", 1, d);
    normal("vit.pos_embed", config.num_patches() + 1, d);
    for (std::size_t l = 0; l < config.depth; ++l) {
        const std::string p = block_prefix(l);
        ones(p + "ln1.gamma", d);
        zeros(p + "ln1.beta", d);
        for (const char* proj : {"q", "k", "v", "out"}) {
            normal(p + "msa." + proj, d, d);
            zeros(p + "msa." + proj + "_bias", d);
        }
        ones(p + "ln2.gamma", d);
        zeros(p + "ln2.beta", d);
        normal(p + "mlp.fc1", config.mlp_dim, d);
        zeros(p + "mlp.fc1_bias", config.mlp_dim);
        normal(p + "mlp.fc2", d, config.mlp_dim);
        zeros(p + "mlp.fc2_bias", d);
    }
    ones("vit.norm.gamma", d);
    zeros("vit.norm.beta", d);
    normal("vit.head.w", config.num_classes, d);
    zeros("vit.head.b", config.num_classes);
}

VitWeights bind(ag::Tape& tape, ParamStore& store, const VitConfig& config) {
    auto p = [&](const std::string& name) { return tape.param(store.at(name)); };
    VitWeights w;
    w.patch_w = p("vit.patch_embed.w");
    w.patch_b = p("vit.patch_embed.b");
    w.class_token = p("vit.class_token");
    w.pos_embed = p("vit.pos_embed");
    for (std::size_t l = 0; l < config.depth; ++l) {
        const std::string b = block_prefix(l);
        w.blocks.push_back(BlockWeights{
            p(b + "ln1.gamma"), p(b + "ln1.beta"),
            p(b + "msa.q"), p(b + "msa.q_bias"), p(b + "msa.k"), p(b + "msa.k_bias"),
            p(b + "msa.v"), p(b + "msa.v_bias"), p(b + "msa.out"), p(b + "msa.out_bias"),
            p(b + "ln2.gamma"), p(b + "ln2.beta"),
            p(b + "mlp.fc1"), p(b + "mlp.fc1_bias"), p(b + "mlp.fc2"), p(b + "mlp.fc2_bias"),
        });
    }
    w.norm_gamma = p("vit.norm.gamma");
    w.norm_beta = p("vit.norm.beta");
    w.head_w = p("vit.head.w");
    w.head_b = p("vit.head.b");
    return w;
}

Var embed_tokens(Var patches, const VitWeights& weights) {
    const Matrix& pos = weights.pos_embed.value();
    if (pos.rows != patches.rows() + 1)
        raise(Errc::DimensionMismatch, std::to_string(patches.rows()) + " patches with " + std::to_string(pos.rows) +
                                           " position rows");
    Var tokens = ag::linear(patches, weights.patch_w, weights.patch_b);
    return ag::add(ag::concat_rows({weights.class_token, tokens}), weights.pos_embed);
}

Var msa_block(Var tokens, const BlockWeights& block, std::size_t heads, AttentionProbe* probe) {
    const std::size_t d = tokens.cols();
    if (heads == 0 || d % heads != 0) raise(Errc::DimensionMismatch, "heads do not divide the embedding dim");
    const std::size_t hd = d / heads;
    const double scale = 1.0 / std::sqrt(static_cast<double>(hd));

    Var x = ag::layer_norm(tokens, block.ln1_gamma, block.ln1_beta, kLayerNormEps);
    Var q = ag::linear(x, block.q, block.q_bias);
    Var k = ag::linear(x, block.k, block.k_bias);
    Var v = ag::linear(x, block.v, block.v_bias);
    std::vector<Var> outputs;
    outputs.reserve(heads);
    for (std::size_t h = 0; h < heads; ++h) {
        Var qh = ag::slice_cols(q, h * hd, hd);
        Var kh = ag::slice_cols(k, h * hd, hd);
        Var vh = ag::slice_cols(v, h * hd, hd);
        Var probs = ag::softmax_rows(ag::scale(ag::matmul_nt(qh, kh), scale));
        if (probe) probe->probabilities.push_back(probs.value());
        outputs.push_back(ag::matmul(probs, vh));
    }
    Var merged = heads == 1 ? outputs.front() : ag::concat_cols(outputs);
    return ag::add(tokens, ag::linear(merged, block.out, block.out_bias));
}

Var mlp_block(Var tokens, const BlockWeights& block) {
    Var x = ag::layer_norm(tokens, block.ln2_gamma, block.ln2_beta, kLayerNormEps);
    Var hidden = ag::gelu(ag::linear(x, block.fc1, block.fc1_bias));
    return ag::add(tokens, ag::linear(hidden, block.fc2, block.fc2_bias));
}

Var encode(Var tokens, const VitWeights& weights, std::size_t heads, AttentionProbe* probe) {
    Var z = tokens;
    for (const auto& block : weights.blocks) {
        z = msa_block(z, block, heads, probe);
        z = mlp_block(z, block);
    }
    return z;
}

Var classify(Var tokens, const VitWeights& weights) {
    Var cls = ag::slice_rows(tokens, 0, 1);
    Var y = ag::layer_norm(cls, weights.norm_gamma, weights.norm_beta, kLayerNormEps);
    return ag::linear(y, weights.head_w, weights.head_b);
}

Var forward(Var pixels, const VitWeights& weights, const VitConfig& config, AttentionProbe* probe) {
    Var patches = patchify(pixels, config);
    Var tokens = embed_tokens(patches, weights);
    return classify(encode(tokens, weights, config.heads, probe), weights);
}

} // namespace gafvit::vit
