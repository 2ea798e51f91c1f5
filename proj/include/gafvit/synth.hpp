#pragma once

// Synthetic driving trips with four behavior regimes.
//
// Each trip is a 99-step speed profile: a damped, noise-driven acceleration
// process around the regime's cruising speed, followed by a terminal manoeuvre
// whose acceleration converges to k * v. With a constant relative rate k the
// endpoint (speed, accel, 0) has a direction set by k. The angle is drawn
// uniformly within a few degrees of the regime's angle, so each regime is a
// bounded bundle under the endpoint cosine distance, and the manoeuvre
// length gives each regime a distinct image signature after GAF encoding.
// Acceleration and jerk come from derive_kinematics on the speed profile.

#include "gafvit/data.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace gafvit::data {

struct RegimeSpec {
    std::string name;
    double mean_speed;          // population mean target, m/s
    double terminal_angle_deg;  // atan(accel / speed) at the endpoint
    std::size_t terminal_steps; // manoeuvre length
    std::size_t ramp_steps;     // blend from cruising accel into k * v
    double accel_noise;         // per-step accel increment std, m/s^2
    double damping;             // 1/s, pulls accel to 0
    double stiffness;           // 1/s^2, pulls speed to cruising speed
    double initial_accel_std;   // m/s^2
    double initial_speed_std = 0.5;
    double angle_jitter_deg = 3.2; // uniform half-width around terminal_angle_deg
};

// Aggressive, Assertive, Conservative, Moderate with mean speeds 7.05, 6.66,
// 2.91 and 4.25 m/s.
std::vector<RegimeSpec> default_regimes();

// Mean of the noise-free speed path relative to its cruising speed.
double terminal_speed_factor(const RegimeSpec& regime, std::size_t steps = kTripLength, double dt = kDefaultDt);

// counts[r] samples of regime r, regime-major order, ids "synth_<r>_<i>",
// labels r. Deterministic for a given seed.
std::vector<Sample> synth_generate(const std::vector<RegimeSpec>& regimes, const std::vector<std::size_t>& counts,
                                   std::uint64_t seed);

} // namespace gafvit::data
