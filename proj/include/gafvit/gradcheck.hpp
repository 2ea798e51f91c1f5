#pragma once

// Analytic gradients against central finite differences.

#include "gafvit/model.hpp"
#include "gafvit/params.hpp"

#include <functional>
#include <string>
#include <vector>

namespace gafvit {

struct GradCheckEntry {
    std::string name;
    std::size_t checked = 0;
    double max_abs_error = 0.0;
    double max_rel_error = 0.0;
};

struct GradCheckReport {
    std::vector<GradCheckEntry> entries; // frozen parameters are not listed
    double max_rel_error = 0.0;
    double tolerance = 0.0;

    bool passed() const noexcept { return max_rel_error < tolerance; }
};

inline constexpr double kGradCheckStep = 1e-5;
// Denominator floor of the relative error |a - n| / max(|a|, |n|, floor).
inline constexpr double kGradCheckFloor = 1e-6;

using LossFn = std::function<autograd::Var(autograd::Tape&, ParamStore&)>;

GradCheckReport grad_check(ParamStore& store, const LossFn& loss, double tolerance, double step = kGradCheckStep);

// Channel attention on a random 8x8x2 image, loss = sum(R * attend(x)).
GradCheckReport grad_check_attention(std::uint64_t seed, double tolerance = 1e-4);

// 8x8x2 image (8 steps, 1 feature), strip patches of 4 rows, D = 8, L = 1,
// 2 heads, through attention, the ViT and cross-entropy.
ModelConfig toy_model_config();
GradCheckReport grad_check_model(std::uint64_t seed, double tolerance = 1e-3,
                                 const std::vector<std::string>& frozen = {});

std::string to_string(const GradCheckReport& report);

} // namespace gafvit
