#pragma once

// End-to-end classifier: feature matrix -> GAF image -> channel attention ->
// ViT logits.

#include "gafvit/autograd.hpp"
#include "gafvit/gaf.hpp"
#include "gafvit/params.hpp"
#include "gafvit/vit.hpp"

#include <cstdint>
#include "json.hpp"
#include <string>
#include <vector>

namespace gafvit {

struct Ablation {
    // Skip channel scaling and feed the GAF image straight to the ViT.
    bool no_attention = false;
    // Replace GAF encoding with a trainable per-time-step linear map from the
    // n features to W * C values, reshaped to the H x W x C image.
    bool no_gaf = false;
};

struct ModelConfig {
    std::size_t steps = 99;
    std::vector<std::string> feature_names{"speed", "accel", "jerk"};
    std::size_t reduction_ratio = 1;
    vit::VitConfig vit;
    Ablation ablation;

    std::size_t features() const noexcept { return feature_names.size(); }
    std::size_t channels() const noexcept { return 2 * features(); }

    // Default hyperparameters for matrices of `steps` x `feature_names`.
    static ModelConfig for_input(std::size_t steps, std::vector<std::string> feature_names);
    void validate() const;
};

nlohmann::json to_json(const ModelConfig& config);
ModelConfig model_config_from_json(const nlohmann::json& j);

class GafVitModel {
public:
    GafVitModel(ModelConfig config, std::uint64_t seed);
    GafVitModel(ModelConfig config, ParamStore params);

    const ModelConfig& config() const noexcept { return m_config; }
    ParamStore& params() noexcept { return m_params; }
    const ParamStore& params() const noexcept { return m_params; }

    // The multi-channel input image as a (H * W) x C tape node.
    autograd::Var image(autograd::Tape& tape, const gaf::FeatureMatrix& features);
    autograd::Var forward(autograd::Tape& tape, const gaf::FeatureMatrix& features,
                          vit::AttentionProbe* probe = nullptr);
    // Attention (unless ablated) and the ViT on a prepared image.
    autograd::Var forward_image(autograd::Tape& tape, autograd::Var pixels, vit::AttentionProbe* probe = nullptr);

    std::vector<double> logits(const gaf::FeatureMatrix& features);
    std::size_t predict(const gaf::FeatureMatrix& features);

private:
    void check_input(const gaf::FeatureMatrix& features) const;

    ModelConfig m_config;
    ParamStore m_params;
};

} // namespace gafvit
