#include "gafvit/model.hpp"

#include "gafvit/attention.hpp"
#include "gafvit/error.hpp"

#include <algorithm>

namespace gafvit {

namespace ag = autograd;

ModelConfig ModelConfig::for_input(std::size_t steps, std::vector<std::string> feature_names) {
    ModelConfig c;
    c.steps = steps;
    c.feature_names = std::move(feature_names);
    c.vit.image_h = steps;
    c.vit.image_w = steps;
    c.vit.channels = c.channels();
    return c;
}

void ModelConfig::validate() const {
    if (steps < 2) raise(Errc::InvalidArgument, "model needs at least 2 time steps");
    if (feature_names.empty()) raise(Errc::InvalidArgument, "model needs at least one feature");
    if (vit.image_h != steps || vit.image_w != steps || vit.channels != channels())
        raise(Errc::DimensionMismatch, "ViT image size must be steps x steps x 2 * features");
    if (reduction_ratio == 0 || channels() % reduction_ratio != 0)
        raise(Errc::InvalidArgument, "reduction ratio must divide the channel count");
    vit.validate();
}

nlohmann::json to_json(const ModelConfig& c) {
    return {
        {"steps", c.steps},
        {"feature_names", c.feature_names},
        {"reduction_ratio", c.reduction_ratio},
        {"no_attention", c.ablation.no_attention},
        {"no_gaf", c.ablation.no_gaf},
        {"vit",
         {{"image_h", c.vit.image_h},
          {"image_w", c.vit.image_w},
          {"channels", c.vit.channels},
          {"patch_mode", vit::to_string(c.vit.patch_mode)},
          {"patch_size", c.vit.patch_size},
          {"embed_dim", c.vit.embed_dim},
          {"depth", c.vit.depth},
          {"heads", c.vit.heads},
          {"mlp_dim", c.vit.mlp_dim},
          {"num_classes", c.vit.num_classes}}},
    };
}

ModelConfig model_config_from_json(const nlohmann::json& j) {
    ModelConfig c;
    c.steps = j.at("steps").get<std::size_t>();
    c.feature_names = j.at("feature_names").get<std::vector<std::string>>();
    c.reduction_ratio = j.at("reduction_ratio").get<std::size_t>();
    c.ablation.no_attention = j.at("no_attention").get<bool>();
    c.ablation.no_gaf = j.at("no_gaf").get<bool>();
    const auto& v = j.at("vit");
    c.vit.image_h = v.at("image_h").get<std::size_t>();
    c.vit.image_w = v.at("image_w").get<std::size_t>();
    c.vit.channels = v.at("channels").get<std::size_t>();
    c.vit.patch_mode = vit::patch_mode_from_string(v.at("patch_mode").get<std::string>());
    c.vit.patch_size = v.at("patch_size").get<std::size_t>();
    c.vit.embed_dim = v.at("embed_dim").get<std::size_t>();
    c.vit.depth = v.at("depth").get<std::size_t>();
    c.vit.heads = v.at("heads").get<std::size_t>();
    c.vit.mlp_dim = v.at("mlp_dim").get<std::size_t>();
    c.vit.num_classes = v.at("num_classes").get<std::size_t>();
    return c;
}

GafVitModel::GafVitModel(ModelConfig config, std::uint64_t seed) : m_config(std::move(config)) {
    m_config.validate();
    m_params.seed = seed;
    std::mt19937_64 rng(seed);
    const std::size_t c = m_config.channels();
    if (m_config.ablation.no_gaf) {
        const std::size_t out = m_config.vit.image_w * c;
        init_normal(m_params.add("reshape.w", out, m_config.features()), rng, vit::kInitStddev);
        m_params.add("reshape.b", 1, out);
    }
    if (!m_config.ablation.no_attention) {
        const std::size_t hidden = c / m_config.reduction_ratio;
        init_normal(m_params.add("attention.w1", hidden, c), rng, attention::kInitStddev);
        init_normal(m_params.add("attention.w2", c, hidden), rng, attention::kInitStddev);
    }
    vit::add_parameters(m_params, m_config.vit, rng);
}

GafVitModel::GafVitModel(ModelConfig config, ParamStore params)
    : m_config(std::move(config)), m_params(std::move(params)) {
    m_config.validate();
}

void GafVitModel::check_input(const gaf::FeatureMatrix& features) const {
    if (features.steps() != m_config.steps || features.features() != m_config.features())
        raise(Errc::DimensionMismatch, "input is " + std::to_string(features.steps()) + "x" +
                                           std::to_string(features.features()) + ", model expects " +
                                           std::to_string(m_config.steps) + "x" + std::to_string(m_config.features()));
}

ag::Var GafVitModel::image(ag::Tape& tape, const gaf::FeatureMatrix& features) {
    check_input(features);
    if (!m_config.ablation.no_gaf) return tape.constant(gaf::encode_matrix(features).pixels);
    features.validate();
    ag::Var raw = tape.constant(features.values);
    ag::Var expanded = ag::linear(raw, tape.param(m_params.at("reshape.w")), tape.param(m_params.at("reshape.b")));
    return ag::reshape(expanded, m_config.vit.image_h * m_config.vit.image_w, m_config.channels());
}

ag::Var GafVitModel::forward_image(ag::Tape& tape, ag::Var pixels, vit::AttentionProbe* probe) {
    ag::Var scaled = pixels;
    if (!m_config.ablation.no_attention)
        scaled = attention::attend(pixels, tape.param(m_params.at("attention.w1")),
                                   tape.param(m_params.at("attention.w2")));
    const auto weights = vit::bind(tape, m_params, m_config.vit);
    return vit::forward(scaled, weights, m_config.vit, probe);
}

ag::Var GafVitModel::forward(ag::Tape& tape, const gaf::FeatureMatrix& features, vit::AttentionProbe* probe) {
    return forward_image(tape, image(tape, features), probe);
}

std::vector<double> GafVitModel::logits(const gaf::FeatureMatrix& features) {
    ag::Tape tape(false);
    return forward(tape, features).value().data;
}

std::size_t GafVitModel::predict(const gaf::FeatureMatrix& features) {
    const auto z = logits(features);
    return static_cast<std::size_t>(std::max_element(z.begin(), z.end()) - z.begin());
}

} // namespace gafvit
