#pragma once

// Trajectory ingestion, cleaning into fixed-length feature matrices, and
// kinematic differencing.

#include "gafvit/gaf.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace gafvit::data {

inline constexpr double kDefaultDt = 0.1;
inline constexpr std::size_t kTripLength = 99;

// One trip on a uniform time grid. accel/jerk are empty when the source file
// did not provide them.
struct Trip {
    std::string trip_id;
    std::vector<double> t;
    std::vector<double> position;
    std::vector<double> speed;
    std::vector<double> accel;
    std::vector<double> jerk;

    std::size_t size() const noexcept { return t.size(); }
    double dt() const;
};

// A labeled (or unlabeled) classifier input.
struct Sample {
    std::string id;
    gaf::FeatureMatrix features;
    std::optional<std::size_t> label;
};

// Header: trip_id,t,position,speed,accel,jerk in any order; position, accel
// and jerk may be omitted. Trips keep first-appearance order; rows are sorted
// by t within a trip.
std::vector<Trip> load_trips(const std::filesystem::path& path);
std::vector<Trip> parse_trips(std::istream& in, const std::string& source = "<stream>");
void write_trips(const std::filesystem::path& path, const std::vector<Trip>& trips);

struct Kinematics {
    std::vector<double> acceleration;
    std::vector<double> jerk;
};

// Forward differences, last value repeated: a[j] = (v[j+1] - v[j]) / dt.
Kinematics derive_kinematics(std::span<const double> speed, double dt);

// accel ~ diff(speed)/dt and jerk ~ diff(accel)/dt within a relative tolerance.
bool kinematic_consistent(const Trip& trip, double rel_tol = 1e-6);

// (speed, accel, jerk) columns; accel/jerk derived when absent.
gaf::FeatureMatrix to_feature_matrix(const Trip& trip);
Trip to_trip(const Sample& sample);

struct CleanLog {
    std::size_t kept = 0;
    std::size_t dropped_nonpositive_speed = 0;
    std::size_t dropped_length = 0;
    std::size_t truncated = 0;
    std::vector<std::string> messages;
};

// Drops trips whose speed is <= 0 at every step and trips whose length is not
// 198 or 199, drops the final point of 199-step trips, and halves each trip
// into two 99-step matrices suffixed _a and _b.
std::vector<Sample> clean_and_split(const std::vector<Trip>& trips, CleanLog* log = nullptr);

// Trips already 99 steps long pass through unchanged; anything else goes
// through clean_and_split.
std::vector<Sample> prepare_samples(const std::vector<Trip>& trips, CleanLog* log = nullptr);

// labels.csv: trip_id,class
void write_labels(const std::filesystem::path& path, const std::vector<Sample>& samples);
// Attaches labels by trip id; throws SchemaError for samples without a label.
void attach_labels(const std::filesystem::path& path, std::vector<Sample>& samples);

} // namespace gafvit::data
