#include "gafvit/synth.hpp"

#include "gafvit/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace gafvit::data {

std::vector<RegimeSpec> default_regimes() {
    return {
        {"aggressive", 7.05, 30.0, 12, 8, 0.020, 0.5, 0.5, 0.6},
        {"assertive", 6.66, -30.0, 16, 10, 0.018, 0.5, 0.5, 0.6},
        {"conservative", 2.91, -10.0, 30, 12, 0.004, 0.3, 0.5, 1.0},
        {"moderate", 4.25, 10.0, 22, 10, 0.040, 0.5, 0.5, 0.3},
    };
}

namespace {

double rate_for_angle(double deg) { return std::tan(deg * std::numbers::pi / 180.0); }

double terminal_rate(const RegimeSpec& r) { return rate_for_angle(r.terminal_angle_deg); }

// Speed path shared by the generator and the calibration. `noise` returns the
// cruising-phase accel increments.
template <typename Noise>
std::vector<double> speed_path(const RegimeSpec& r, std::size_t steps, double dt, double cruise, double v0, double a0,
                               double rate, Noise&& noise) {
    std::vector<double> v(steps);
    v[0] = v0;
    double a = a0;
    const std::size_t start = steps - 1 - std::min(r.terminal_steps, steps - 1);
    for (std::size_t t = 0; t + 1 < steps; ++t) {
        if (t < start) {
            a += (-r.damping * a - r.stiffness * (v[t] - cruise)) * dt + noise();
        } else {
            const double w = std::min(1.0, static_cast<double>(t - start + 1) / static_cast<double>(std::max<std::size_t>(1, r.ramp_steps)));
            a = (1.0 - w) * a + w * rate * v[t];
        }
        v[t + 1] = std::max(v[t] + a * dt, 0.0);
    }
    return v;
}

} // namespace

double terminal_speed_factor(const RegimeSpec& regime, std::size_t steps, double dt) {
    const auto v = speed_path(regime, steps, dt, 1.0, 1.0, 0.0, terminal_rate(regime), [] { return 0.0; });
    double total = 0.0;
    for (double x : v) total += x;
    return total / static_cast<double>(steps);
}

std::vector<Sample> synth_generate(const std::vector<RegimeSpec>& regimes, const std::vector<std::size_t>& counts,
                                   std::uint64_t seed) {
    if (counts.size() != regimes.size())
        raise(Errc::InvalidArgument, std::to_string(counts.size()) + " counts for " + std::to_string(regimes.size()) +
                                         " regimes");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    std::vector<Sample> out;
    for (std::size_t r = 0; r < regimes.size(); ++r) {
        const auto& spec = regimes[r];
        const double cruise = spec.mean_speed / terminal_speed_factor(spec);
        for (std::size_t i = 0; i < counts[r]; ++i) {
            const double rate = rate_for_angle(spec.terminal_angle_deg + spec.angle_jitter_deg * unit(rng));
            const double v0 = cruise + spec.initial_speed_std * gauss(rng);
            const double a0 = spec.initial_accel_std * gauss(rng);
            const auto speed = speed_path(spec, kTripLength, kDefaultDt, cruise, std::max(v0, 0.0), a0, rate,
                                          [&] { return spec.accel_noise * gauss(rng); });
            const auto kin = derive_kinematics(speed, kDefaultDt);
            Sample s;
            s.id = "synth_" + std::to_string(r) + "_" + std::to_string(i);
            s.label = r;
            s.features.feature_names = {"speed", "accel", "jerk"};
            s.features.dt = kDefaultDt;
            s.features.values = Matrix(kTripLength, 3);
            for (std::size_t j = 0; j < kTripLength; ++j) {
                s.features.values(j, 0) = speed[j];
                s.features.values(j, 1) = kin.acceleration[j];
                s.features.values(j, 2) = kin.jerk[j];
            }
            out.push_back(std::move(s));
        }
    }
    return out;
}

} // namespace gafvit::data
