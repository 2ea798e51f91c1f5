#include "gafvit/optim.hpp"

#include "gafvit/error.hpp"
#include "gafvit/kernels.hpp"

#include <cmath>

namespace gafvit {

void AdamW::step(ParamStore& store) {
    auto& params = store.all();
    for (const auto& p : params) {
        if (p.frozen) continue;
        if (!p.grad.same_shape(p.value)) raise(Errc::ShapeMismatch, "gradient slot of " + p.name);
        if (!p.grad.all_finite()) raise(Errc::NonFiniteGradient, "gradient of " + p.name + " is not finite");
    }
    if (m_first.size() != params.size()) {
        m_first.assign(params.size(), {});
        m_second.assign(params.size(), {});
        for (std::size_t i = 0; i < params.size(); ++i) {
            m_first[i].assign(params[i].value.size(), 0.0);
            m_second[i].assign(params[i].value.size(), 0.0);
        }
    }

    ++m_step;
    ++store.step;
    const double t = static_cast<double>(m_step);
    const kernels::AdamWArgs args{m_config.learning_rate,
                                  m_config.beta1,
                                  m_config.beta2,
                                  m_config.eps,
                                  m_config.weight_decay,
                                  1.0 - std::pow(m_config.beta1, t),
                                  1.0 - std::pow(m_config.beta2, t)};
    const auto& k = kernels::active();
    for (std::size_t i = 0; i < params.size(); ++i) {
        auto& p = params[i];
        if (p.frozen) continue;
        k.adamw(p.value.data.data(), p.grad.data.data(), m_first[i].data(), m_second[i].data(), p.value.size(), args);
    }
}

} // namespace gafvit
