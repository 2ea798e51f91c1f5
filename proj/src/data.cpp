#include "gafvit/data.hpp"

#include "gafvit/error.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>
#include <unordered_map>

namespace gafvit::data {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(',', start);
        out.push_back(trim(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

std::optional<double> parse_double(std::string_view s) {
    double v = 0.0;
    const auto* end = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(s.data(), end, v);
    if (ec != std::errc{} || ptr != end) return std::nullopt;
    return v;
}

std::string format_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

} // namespace

double Trip::dt() const {
    if (t.size() < 2) return kDefaultDt;
    return t[1] - t[0];
}

std::vector<Trip> parse_trips(std::istream& in, const std::string& source) {
    std::string line;
    std::size_t line_no = 0;
    // Skip blank lines before the header.
    while (std::getline(in, line)) {
        ++line_no;
        if (!trim(line).empty()) break;
    }
    if (trim(line).empty()) raise(Errc::EmptyFile, source + " has no header");

    const auto header = split(line);
    std::unordered_map<std::string, std::size_t> column;
    for (std::size_t i = 0; i < header.size(); ++i) {
        const std::string name(header[i]);
        static const std::vector<std::string> known{"trip_id", "t", "position", "speed", "accel", "jerk"};
        if (std::find(known.begin(), known.end(), name) == known.end())
            raise(Errc::SchemaError, source + ": unknown column '" + name + "'");
        if (!column.emplace(name, i).second) raise(Errc::SchemaError, source + ": duplicate column '" + name + "'");
    }
    for (const char* required : {"trip_id", "t", "speed"})
        if (!column.contains(required)) raise(Errc::SchemaError, source + ": missing column '" + required + "'");
    const bool has_pos = column.contains("position");
    const bool has_accel = column.contains("accel");
    const bool has_jerk = column.contains("jerk");

    struct Row {
        double t, position, speed, accel, jerk;
    };
    std::vector<std::string> order;
    std::unordered_map<std::string, std::vector<Row>> rows;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const auto cells = split(line);
        if (cells.size() != header.size())
            raise(Errc::SchemaError, source + ":" + std::to_string(line_no) + ": expected " +
                                         std::to_string(header.size()) + " fields, got " + std::to_string(cells.size()));
        auto num = [&](const char* name) -> double {
            const auto cell = cells[column.at(name)];
            const auto v = parse_double(cell);
            if (!v || !std::isfinite(*v))
                raise(Errc::SchemaError, source + ":" + std::to_string(line_no) + ": bad " + name + " value '" +
                                             std::string(cell) + "'");
            return *v;
        };
        const std::string id(cells[column.at("trip_id")]);
        if (id.empty()) raise(Errc::SchemaError, source + ":" + std::to_string(line_no) + ": empty trip_id");
        Row r{num("t"), has_pos ? num("position") : 0.0, num("speed"), has_accel ? num("accel") : 0.0,
              has_jerk ? num("jerk") : 0.0};
        auto [it, inserted] = rows.try_emplace(id);
        if (inserted) order.push_back(id);
        it->second.push_back(r);
    }
    if (order.empty()) raise(Errc::EmptyFile, source + " has no data rows");

    std::vector<Trip> trips;
    trips.reserve(order.size());
    for (const auto& id : order) {
        auto& rs = rows.at(id);
        std::stable_sort(rs.begin(), rs.end(), [](const Row& a, const Row& b) { return a.t < b.t; });
        Trip trip;
        trip.trip_id = id;
        for (std::size_t i = 0; i < rs.size(); ++i) {
            if (i > 0 && !(rs[i].t > rs[i - 1].t))
                raise(Errc::NonMonotonicTime, source + ": trip " + id + " repeats t = " + format_double(rs[i].t));
            trip.t.push_back(rs[i].t);
            if (has_pos) trip.position.push_back(rs[i].position);
            trip.speed.push_back(rs[i].speed);
            if (has_accel) trip.accel.push_back(rs[i].accel);
            if (has_jerk) trip.jerk.push_back(rs[i].jerk);
        }
        if (trip.size() > 2) {
            const double dt = trip.dt();
            for (std::size_t i = 1; i < trip.size(); ++i)
                if (std::abs((trip.t[i] - trip.t[i - 1]) - dt) > 1e-9)
                    raise(Errc::NonMonotonicTime, source + ": trip " + id + " is not on a uniform time grid near t = " +
                                                      format_double(trip.t[i]));
        }
        trips.push_back(std::move(trip));
    }
    return trips;
}

std::vector<Trip> load_trips(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) raise(Errc::IoError, "cannot open " + path.string());
    return parse_trips(in, path.string());
}

void write_trips(const std::filesystem::path& path, const std::vector<Trip>& trips) {
    std::ofstream out(path);
    if (!out) raise(Errc::IoError, "cannot open " + path.string());
    out << "trip_id,t,position,speed,accel,jerk\n";
    for (const auto& trip : trips) {
        const auto kin = trip.accel.empty() || trip.jerk.empty() ? derive_kinematics(trip.speed, trip.dt()) : Kinematics{};
        const auto& accel = trip.accel.empty() ? kin.acceleration : trip.accel;
        const auto& jerk = trip.jerk.empty() ? kin.jerk : trip.jerk;
        for (std::size_t i = 0; i < trip.size(); ++i) {
            out << trip.trip_id << ',' << format_double(trip.t[i]) << ','
                << format_double(trip.position.empty() ? 0.0 : trip.position[i]) << ',' << format_double(trip.speed[i])
                << ',' << format_double(accel[i]) << ',' << format_double(jerk[i]) << '\n';
        }
    }
    if (!out) raise(Errc::IoError, "write failed for " + path.string());
}

Kinematics derive_kinematics(std::span<const double> speed, double dt) {
    if (speed.size() < 3) raise(Errc::TooShort, "kinematics need at least 3 speed samples");
    if (!(dt > 0.0)) raise(Errc::InvalidArgument, "dt must be positive");
    auto diff = [dt](std::span<const double> x) {
        std::vector<double> d(x.size());
        for (std::size_t j = 0; j + 1 < x.size(); ++j) d[j] = (x[j + 1] - x[j]) / dt;
        d.back() = d[d.size() - 2];
        return d;
    };
    Kinematics k;
    k.acceleration = diff(speed);
    k.jerk = diff(k.acceleration);
    return k;
}

bool kinematic_consistent(const Trip& trip, double rel_tol) {
    if (trip.accel.empty() || trip.jerk.empty() || trip.size() < 3) return false;
    const auto k = derive_kinematics(trip.speed, trip.dt());
    auto close = [rel_tol](const std::vector<double>& a, const std::vector<double>& b) {
        for (std::size_t i = 0; i < a.size(); ++i) {
            const double scale = std::max({1.0, std::abs(a[i]), std::abs(b[i])});
            if (std::abs(a[i] - b[i]) > rel_tol * scale) return false;
        }
        return true;
    };
    return close(trip.accel, k.acceleration) && close(trip.jerk, k.jerk);
}

gaf::FeatureMatrix to_feature_matrix(const Trip& trip) {
    const std::size_t m = trip.size();
    gaf::FeatureMatrix f;
    f.feature_names = {"speed", "accel", "jerk"};
    f.dt = trip.dt();
    f.values = Matrix(m, 3);
    Kinematics derived;
    if (trip.accel.empty() || trip.jerk.empty()) derived = derive_kinematics(trip.speed, f.dt);
    const auto& accel = trip.accel.empty() ? derived.acceleration : trip.accel;
    const auto& jerk = trip.jerk.empty() ? derived.jerk : trip.jerk;
    for (std::size_t j = 0; j < m; ++j) {
        f.values(j, 0) = trip.speed[j];
        f.values(j, 1) = accel[j];
        f.values(j, 2) = jerk[j];
    }
    return f;
}

Trip to_trip(const Sample& sample) {
    const auto& f = sample.features;
    Trip trip;
    trip.trip_id = sample.id;
    double pos = 0.0;
    for (std::size_t j = 0; j < f.steps(); ++j) {
        trip.t.push_back(static_cast<double>(j) * f.dt);
        if (j > 0) pos += 0.5 * (f.values(j - 1, 0) + f.values(j, 0)) * f.dt;
        trip.position.push_back(pos);
        trip.speed.push_back(f.values(j, 0));
        trip.accel.push_back(f.values(j, 1));
        trip.jerk.push_back(f.values(j, 2));
    }
    return trip;
}

namespace {

Sample slice_sample(const Trip& trip, std::size_t start, std::size_t length, const std::string& suffix) {
    Trip part;
    part.trip_id = trip.trip_id + suffix;
    auto take = [&](const std::vector<double>& v) {
        return v.empty() ? std::vector<double>{}
                         : std::vector<double>(v.begin() + static_cast<std::ptrdiff_t>(start),
                                               v.begin() + static_cast<std::ptrdiff_t>(start + length));
    };
    part.t = take(trip.t);
    part.position = take(trip.position);
    part.speed = take(trip.speed);
    // Derived over the full trip first so the halves share one differencing.
    Kinematics full;
    if (trip.accel.empty() || trip.jerk.empty()) full = derive_kinematics(trip.speed, trip.dt());
    part.accel = take(trip.accel.empty() ? full.acceleration : trip.accel);
    part.jerk = take(trip.jerk.empty() ? full.jerk : trip.jerk);
    return Sample{part.trip_id, to_feature_matrix(part), std::nullopt};
}

} // namespace

std::vector<Sample> clean_and_split(const std::vector<Trip>& trips, CleanLog* log) {
    CleanLog local;
    CleanLog& lg = log ? *log : local;
    std::vector<Sample> out;
    for (const auto& trip : trips) {
        const bool all_nonpositive =
            std::all_of(trip.speed.begin(), trip.speed.end(), [](double v) { return v <= 0.0; });
        if (all_nonpositive) {
            ++lg.dropped_nonpositive_speed;
            lg.messages.push_back("dropped " + trip.trip_id + ": speed <= 0 at every step");
            continue;
        }
        if (trip.size() != 2 * kTripLength && trip.size() != 2 * kTripLength + 1) {
            ++lg.dropped_length;
            lg.messages.push_back("dropped " + trip.trip_id + ": length " + std::to_string(trip.size()));
            continue;
        }
        if (trip.size() == 2 * kTripLength + 1) ++lg.truncated;
        out.push_back(slice_sample(trip, 0, kTripLength, "_a"));
        out.push_back(slice_sample(trip, kTripLength, kTripLength, "_b"));
        ++lg.kept;
    }
    return out;
}

std::vector<Sample> prepare_samples(const std::vector<Trip>& trips, CleanLog* log) {
    const bool prepared =
        std::all_of(trips.begin(), trips.end(), [](const Trip& t) { return t.size() == kTripLength; });
    if (!prepared) return clean_and_split(trips, log);
    std::vector<Sample> out;
    out.reserve(trips.size());
    for (const auto& trip : trips) out.push_back(Sample{trip.trip_id, to_feature_matrix(trip), std::nullopt});
    if (log) log->kept = out.size();
    return out;
}

void write_labels(const std::filesystem::path& path, const std::vector<Sample>& samples) {
    std::ofstream out(path);
    if (!out) raise(Errc::IoError, "cannot open " + path.string());
    out << "trip_id,class\n";
    for (const auto& s : samples) {
        if (!s.label) raise(Errc::SchemaError, "sample " + s.id + " has no label");
        out << s.id << ',' << *s.label << '\n';
    }
}

void attach_labels(const std::filesystem::path& path, std::vector<Sample>& samples) {
    std::ifstream in(path);
    if (!in) raise(Errc::IoError, "cannot open " + path.string());
    std::string line;
    if (!std::getline(in, line)) raise(Errc::EmptyFile, path.string() + " is empty");
    const auto header = split(line);
    if (header.size() != 2 || header[0] != "trip_id" || header[1] != "class")
        raise(Errc::SchemaError, path.string() + ": expected header trip_id,class");
    std::unordered_map<std::string, std::size_t> labels;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const auto cells = split(line);
        std::size_t label = 0;
        const auto cell = cells.size() == 2 ? cells[1] : std::string_view{};
        auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), label);
        if (cells.size() != 2 || ec != std::errc{} || ptr != cell.data() + cell.size())
            raise(Errc::SchemaError, path.string() + ":" + std::to_string(line_no) + ": malformed label row");
        labels[std::string(cells[0])] = label;
    }
    for (auto& s : samples) {
        auto it = labels.find(s.id);
        if (it == labels.end()) raise(Errc::SchemaError, "no label for " + s.id + " in " + path.string());
        s.label = it->second;
    }
}

} // namespace gafvit::data
