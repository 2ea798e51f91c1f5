#include "doctest.h"

#include "gafvit/clustering.hpp"
#include "gafvit/data.hpp"
#include "gafvit/error.hpp"
#include "gafvit/synth.hpp"

#include <cmath>
#include <filesystem>
#include <random>
#include <sstream>

using namespace gafvit;
using namespace gafvit::data;

namespace {

std::vector<Trip> parse(const std::string& text) {
    std::istringstream in(text);
    return parse_trips(in, "test.csv");
}

Errc code_of(const std::string& text) {
    try {
        parse(text);
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected throw");
    return Errc::InvalidArgument;
}

Trip ramp_trip(const std::string& id, std::size_t n, double speed0 = 1.0) {
    Trip t;
    t.trip_id = id;
    for (std::size_t i = 0; i < n; ++i) {
        t.t.push_back(0.1 * static_cast<double>(i));
        t.speed.push_back(speed0 + std::sin(0.05 * static_cast<double>(i)));
    }
    return t;
}

} // namespace

TEST_CASE("two trips of five rows") {
    std::string text = "trip_id,t,speed\n";
    for (int trip = 0; trip < 2; ++trip)
        for (int i = 0; i < 5; ++i) text += "T" + std::to_string(trip) + "," + std::to_string(0.1 * i) + ",1\n";
    auto trips = parse(text);
    REQUIRE(trips.size() == 2);
    CHECK(trips[0].size() == 5);
    CHECK(trips[1].trip_id == "T1");
    CHECK(trips[0].dt() == doctest::Approx(0.1));
}

TEST_CASE("shuffled rows are sorted by time") {
    auto trips = parse("speed,t,trip_id\n3,0.2,A\n1,0,A\n2,0.1,A\n");
    REQUIRE(trips.size() == 1);
    CHECK(trips[0].speed == std::vector<double>{1, 2, 3});
}

TEST_CASE("schema errors") {
    try {
        parse("trip_id,t,accel\nA,0,1\n");
        FAIL("expected throw");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::SchemaError);
        CHECK(std::string(e.what()).find("speed") != std::string::npos);
    }
    CHECK(code_of("trip_id,t,speed,color\nA,0,1,red\n") == Errc::SchemaError);
    try {
        parse("trip_id,t,speed\nA,0,1\nA,0.1,fast\n");
        FAIL("expected throw");
    } catch (const Error& e) {
        CHECK(std::string(e.what()).find(":3") != std::string::npos);
    }
    CHECK(code_of("trip_id,t,speed\nA,0,1\nA,0,2\n") == Errc::NonMonotonicTime);
    CHECK(code_of("trip_id,t,speed\nA,0,1\nA,0.1,2\nA,0.3,2\n") == Errc::NonMonotonicTime);
    CHECK(code_of("trip_id,t,speed\n") == Errc::EmptyFile);
    CHECK(code_of("") == Errc::EmptyFile);
}

TEST_CASE("derive_kinematics") {
    const std::vector<double> c{2, 2, 2, 2};
    auto k = derive_kinematics(c, 0.1);
    for (double a : k.acceleration) CHECK(a == 0.0);
    for (double j : k.jerk) CHECK(j == 0.0);
    const std::vector<double> r{0, 1, 2};
    auto kr = derive_kinematics(r, 0.1);
    for (double a : kr.acceleration) CHECK(a == doctest::Approx(10.0));
    const std::vector<double> s{1, 2};
    try {
        derive_kinematics(s, 0.1);
        FAIL("expected throw");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::TooShort);
    }

    std::mt19937_64 rng(1);
    std::normal_distribution<double> g;
    std::vector<double> v(30);
    for (double& x : v) x = g(rng);
    auto kv = derive_kinematics(v, 0.1);
    for (std::size_t i = 0; i + 2 < v.size(); ++i) {
        const double second = (v[i + 2] - 2 * v[i + 1] + v[i]) / 0.01;
        CHECK(kv.jerk[i] == doctest::Approx(second).epsilon(1e-9));
    }
}

TEST_CASE("kinematic consistency flag") {
    Trip t = ramp_trip("A", 10);
    auto k = derive_kinematics(t.speed, 0.1);
    t.accel = k.acceleration;
    t.jerk = k.jerk;
    CHECK(kinematic_consistent(t));
    t.jerk[3] += 1.0;
    CHECK_FALSE(kinematic_consistent(t));
}

TEST_CASE("clean_and_split") {
    std::vector<Trip> trips{ramp_trip("long", 199), ramp_trip("even", 198), ramp_trip("short", 150)};
    Trip zero = ramp_trip("zero", 198);
    for (double& v : zero.speed) v = 0.0;
    trips.push_back(zero);
    Trip mostly = ramp_trip("stop", 198);
    mostly.speed[5] = 0.0;
    trips.push_back(mostly);

    CleanLog log;
    auto out = clean_and_split(trips, &log);
    REQUIRE(out.size() == 6);
    CHECK(out[0].id == "long_a");
    CHECK(out[1].id == "long_b");
    CHECK(out[4].id == "stop_a");
    for (const auto& s : out) {
        CHECK(s.features.steps() == 99);
        CHECK(s.features.features() == 3);
        CHECK(s.features.values.all_finite());
    }
    CHECK(out[1].features.values(98, 0) == trips[0].speed[197]);
    CHECK(out[1].features.values(0, 0) == trips[0].speed[99]);
    CHECK(log.dropped_length == 1);
    CHECK(log.dropped_nonpositive_speed == 1);
    CHECK(log.truncated == 1);
}

TEST_CASE("prepare_samples passes 99-step trips through") {
    auto out = prepare_samples({ramp_trip("x", 99)});
    REQUIRE(out.size() == 1);
    CHECK(out[0].id == "x");
}

TEST_CASE("write/load round trip and labels") {
    auto samples = synth_generate(default_regimes(), {3, 3, 3, 3}, 5);
    std::vector<Trip> trips;
    for (const auto& s : samples) trips.push_back(to_trip(s));
    const auto dir = std::filesystem::temp_directory_path() / "gafvit_data_test";
    std::filesystem::create_directories(dir);
    write_trips(dir / "trips.csv", trips);
    write_labels(dir / "labels.csv", samples);
    auto loaded = prepare_samples(load_trips(dir / "trips.csv"));
    REQUIRE(loaded.size() == samples.size());
    attach_labels(dir / "labels.csv", loaded);
    for (std::size_t i = 0; i < loaded.size(); ++i) {
        CHECK(loaded[i].id == samples[i].id);
        CHECK(loaded[i].label == samples[i].label);
        CHECK(loaded[i].features.values == samples[i].features.values);
    }
    std::filesystem::remove_all(dir);
}

TEST_CASE("synthetic generator") {
    const auto regimes = default_regimes();
    auto a = synth_generate(regimes, {10, 10, 10, 10}, 7);
    auto b = synth_generate(regimes, {10, 10, 10, 10}, 7);
    REQUIRE(a.size() == 40);
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].features.values == b[i].features.values);
        CHECK(*a[i].label == i / 10);
        CHECK_NOTHROW(a[i].features.validate());
        for (std::size_t c = 0; c < 3; ++c) {
            auto col = a[i].features.column(c);
            CHECK(*std::max_element(col.begin(), col.end()) > *std::min_element(col.begin(), col.end()));
        }
        for (double v : a[i].features.column(0)) CHECK(v >= 0.0);
    }
    CHECK(synth_generate(regimes, {10, 10, 10, 10}, 8)[0].features.values != a[0].features.values);

    auto big = synth_generate(regimes, {500, 500, 500, 500}, 1);
    std::vector<gaf::FeatureMatrix> d;
    std::vector<std::size_t> labels;
    for (const auto& s : big) {
        d.push_back(s.features);
        labels.push_back(*s.label);
    }
    const auto stats = clustering::class_summary(d, labels);
    for (std::size_t r = 0; r < 4; ++r) CHECK(std::abs(stats[r].speed_mean - regimes[r].mean_speed) < 0.5);
    // accel std ordered 0 > 1 > 2 > 3, jerk std 0 > 1 > 3 > 2
    CHECK(stats[0].accel_std > stats[1].accel_std);
    CHECK(stats[1].accel_std > stats[2].accel_std);
    CHECK(stats[2].accel_std > stats[3].accel_std);
    CHECK(stats[0].jerk_std > stats[1].jerk_std);
    CHECK(stats[1].jerk_std > stats[3].jerk_std);
    CHECK(stats[3].jerk_std > stats[2].jerk_std);
    CHECK_THROWS_AS(synth_generate(regimes, {1, 2}, 1), Error);
}
