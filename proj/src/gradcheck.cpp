#include "gafvit/gradcheck.hpp"

#include "gafvit/attention.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>

namespace gafvit {

namespace ag = autograd;

GradCheckReport grad_check(ParamStore& store, const LossFn& loss, double tolerance, double step) {
    store.zero_grad();
    {
        ag::Tape tape;
        tape.backward(loss(tape, store));
    }
    auto evaluate = [&] {
        ag::Tape tape(false);
        return loss(tape, store).item();
    };
    GradCheckReport report;
    report.tolerance = tolerance;
    for (auto& p : store.all()) {
        if (p.frozen) continue;
        GradCheckEntry e{p.name, 0, 0.0, 0.0};
        for (std::size_t i = 0; i < p.value.data.size(); ++i) {
            const double saved = p.value.data[i];
            p.value.data[i] = saved + step;
            const double up = evaluate();
            p.value.data[i] = saved - step;
            const double down = evaluate();
            p.value.data[i] = saved;
            const double numeric = (up - down) / (2.0 * step);
            const double analytic = p.grad.data[i];
            const double abs_err = std::abs(analytic - numeric);
            const double rel = abs_err / std::max({std::abs(analytic), std::abs(numeric), kGradCheckFloor});
            e.max_abs_error = std::max(e.max_abs_error, abs_err);
            e.max_rel_error = std::max(e.max_rel_error, rel);
            ++e.checked;
        }
        report.max_rel_error = std::max(report.max_rel_error, e.max_rel_error);
        report.entries.push_back(e);
    }
    store.zero_grad();
    return report;
}

namespace {

Matrix random_matrix(std::size_t r, std::size_t c, std::mt19937_64& rng, double lo, double hi) {
    std::uniform_real_distribution<double> u(lo, hi);
    Matrix m(r, c);
    for (double& v : m.data) v = u(rng);
    return m;
}

} // namespace

GradCheckReport grad_check_attention(std::uint64_t seed, double tolerance) {
    std::mt19937_64 rng(seed);
    const Matrix image = random_matrix(64, 2, rng, -1.0, 1.0);
    const Matrix weight = random_matrix(64, 2, rng, -1.0, 1.0);
    ParamStore store;
    init_normal(store.add("attention.w1", 2, 2), rng, 0.5);
    init_normal(store.add("attention.w2", 2, 2), rng, 0.5);
    auto loss = [&](ag::Tape& tape, ParamStore& s) {
        ag::Var x = tape.constant(image);
        ag::Var y = attention::attend(x, tape.param(s.at("attention.w1")), tape.param(s.at("attention.w2")));
        return ag::sum(ag::mul(y, tape.constant(weight)));
    };
    return grad_check(store, loss, tolerance);
}

ModelConfig toy_model_config() {
    ModelConfig c = ModelConfig::for_input(8, {"x"});
    c.vit.patch_size = 4;
    c.vit.embed_dim = 8;
    c.vit.depth = 1;
    c.vit.heads = 2;
    c.vit.mlp_dim = 8;
    c.vit.num_classes = 4;
    return c;
}

GradCheckReport grad_check_model(std::uint64_t seed, double tolerance, const std::vector<std::string>& frozen) {
    const ModelConfig config = toy_model_config();
    GafVitModel model(config, seed);
    std::mt19937_64 rng(seed + 1);
    // Larger weights than the training init so that no gradient is negligible.
    for (auto& p : model.params().all()) {
        if (p.name.ends_with("gamma")) {
            for (double& v : p.value.data) v = 1.0 + std::normal_distribution<double>(0.0, 0.2)(rng);
        } else {
            init_normal(p, rng, 0.3);
        }
    }
    for (const auto& name : frozen) model.params().at(name).frozen = true;

    gaf::FeatureMatrix features;
    features.feature_names = config.feature_names;
    features.values = random_matrix(config.steps, 1, rng, -2.0, 2.0);
    const std::size_t label = static_cast<std::size_t>(rng() % config.vit.num_classes);

    auto loss = [&](ag::Tape& tape, ParamStore&) {
        return ag::cross_entropy(model.forward(tape, features), label);
    };
    return grad_check(model.params(), loss, tolerance);
}

std::string to_string(const GradCheckReport& report) {
    std::string out;
    char buf[200];
    for (const auto& e : report.entries) {
        std::snprintf(buf, sizeof buf, "%-28s n=%-5zu max_abs=%.3e max_rel=%.3e\n", e.name.c_str(), e.checked,
                      e.max_abs_error, e.max_rel_error);
        out += buf;
    }
    std::snprintf(buf, sizeof buf, "max relative error %.3e (tolerance %.1e): %s\n", report.max_rel_error,
                  report.tolerance, report.passed() ? "ok" : "FAILED");
    out += buf;
    return out;
}

} // namespace gafvit
