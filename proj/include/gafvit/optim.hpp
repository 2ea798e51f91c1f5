#pragma once

#include "gafvit/params.hpp"

#include <vector>

namespace gafvit {

struct AdamWConfig {
    double learning_rate = 1e-5;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double weight_decay = 0.01;
};

// Adam with decoupled weight decay:
//   m = b1 m + (1 - b1) g,  v = b2 v + (1 - b2) g^2
//   p <- p - lr * m_hat / (sqrt(v_hat) + eps) - lr * wd * p
// Frozen parameters are skipped.
class AdamW {
public:
    explicit AdamW(AdamWConfig config = {}) : m_config(config) {}

    const AdamWConfig& config() const noexcept { return m_config; }
    void set_learning_rate(double lr) noexcept { m_config.learning_rate = lr; }
    std::uint64_t steps() const noexcept { return m_step; }

    // Throws NonFiniteGradient before touching any parameter.
    void step(ParamStore& store);

private:
    AdamWConfig m_config;
    std::uint64_t m_step = 0;
    std::vector<std::vector<double>> m_first;
    std::vector<std::vector<double>> m_second;
};

} // namespace gafvit
