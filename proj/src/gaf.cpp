#include "gafvit/gaf.hpp"

#include "gafvit/error.hpp"
#include "gafvit/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <thread>

namespace gafvit::gaf {

std::vector<double> FeatureMatrix::column(std::size_t i) const {
    std::vector<double> out(values.rows);
    for (std::size_t j = 0; j < values.rows; ++j) out[j] = values(j, i);
    return out;
}

void FeatureMatrix::validate() const {
    if (values.rows < 2) raise(Errc::TooShort, "feature matrix needs at least 2 time steps");
    if (values.cols < 1) raise(Errc::DimensionMismatch, "feature matrix needs at least 1 feature");
    if (feature_names.size() != values.cols)
        raise(Errc::DimensionMismatch, std::to_string(feature_names.size()) + " feature names for " +
                                           std::to_string(values.cols) + " columns");
    std::set<std::string> unique(feature_names.begin(), feature_names.end());
    if (unique.size() != feature_names.size()) raise(Errc::InvalidArgument, "duplicate feature names");
    if (!values.all_finite()) raise(Errc::NonFiniteInput, "feature matrix has non-finite entries");
}

Matrix MultiChannelImage::channel(std::size_t c) const {
    if (c >= channels()) raise(Errc::ChannelOutOfBounds, "channel " + std::to_string(c));
    Matrix out(height, width);
    for (std::size_t p = 0; p < height * width; ++p) out.data[p] = pixels(p, c);
    return out;
}

NormalizedSeries normalize_series(std::span<const double> series) {
    if (series.size() < 2) raise(Errc::TooShort, "series needs at least 2 values");
    for (double v : series)
        if (!std::isfinite(v)) raise(Errc::NonFiniteInput, "series has non-finite values");
    const auto [lo, hi] = std::minmax_element(series.begin(), series.end());
    const double min = *lo;
    const double range = *hi - min;
    if (range == 0.0) raise(Errc::DegenerateSeries, "series is constant");
    NormalizedSeries out;
    out.values.resize(series.size());
    for (std::size_t j = 0; j < series.size(); ++j) out.values[j] = (series[j] - min) / range;
    return out;
}

namespace {

double clamp_unit(double v) {
    if (v < -kClampTolerance || v > 1.0 + kClampTolerance)
        raise(Errc::OutOfRange, "normalized value " + std::to_string(v) + " outside [0, 1]");
    return std::clamp(v, 0.0, 1.0);
}

// Clamped values and their complements sqrt(1 - f^2) = sin(arccos f).
void unit_and_complement(const NormalizedSeries& norm, std::vector<double>& f, std::vector<double>& s) {
    const std::size_t m = norm.values.size();
    f.resize(m);
    s.resize(m);
    for (std::size_t j = 0; j < m; ++j) {
        f[j] = clamp_unit(norm.values[j]);
        s[j] = std::sqrt(std::max(0.0, 1.0 - f[j] * f[j]));
    }
}

void fill_fields(const std::vector<double>& f, const std::vector<double>& s, Matrix* sum, Matrix* diff) {
    const std::size_t m = f.size();
    const auto& k = kernels::active();
    std::vector<double> scratch(m);
    for (std::size_t j = 0; j < m; ++j) {
        double* gasf_row = sum ? sum->row(j).data() : scratch.data();
        double* gadf_row = diff ? diff->row(j).data() : scratch.data();
        k.gaf_row(f[j], s[j], f.data(), s.data(), gasf_row, gadf_row, m);
    }
}

} // namespace

PolarSeries to_polar(const NormalizedSeries& norm) {
    const std::size_t m = norm.values.size();
    PolarSeries out;
    out.angles.resize(m);
    out.radii.resize(m);
    for (std::size_t j = 0; j < m; ++j) {
        out.angles[j] = std::acos(clamp_unit(norm.values[j]));
        out.radii[j] = static_cast<double>(j + 1) / static_cast<double>(m);
    }
    return out;
}

Matrix gasf(const NormalizedSeries& norm) {
    std::vector<double> f, s;
    unit_and_complement(norm, f, s);
    Matrix out(f.size(), f.size());
    fill_fields(f, s, &out, nullptr);
    return out;
}

Matrix gadf(const NormalizedSeries& norm) {
    std::vector<double> f, s;
    unit_and_complement(norm, f, s);
    Matrix out(f.size(), f.size());
    fill_fields(f, s, nullptr, &out);
    return out;
}

GafPair encode_feature(std::span<const double> series) {
    const NormalizedSeries norm = normalize_series(series);
    std::vector<double> f, s;
    unit_and_complement(norm, f, s);
    GafPair pair{Matrix(f.size(), f.size()), Matrix(f.size(), f.size())};
    fill_fields(f, s, &pair.gasf, &pair.gadf);
    return pair;
}

MultiChannelImage encode_matrix(const FeatureMatrix& features, unsigned threads) {
    features.validate();
    const std::size_t m = features.steps();
    const std::size_t n = features.features();

    MultiChannelImage image;
    image.height = m;
    image.width = m;
    image.pixels = Matrix(m * m, 2 * n);
    image.channel_names.reserve(2 * n);
    for (const auto& name : features.feature_names) {
        image.channel_names.push_back(name + "/gasf");
        image.channel_names.push_back(name + "/gadf");
    }

    std::vector<GafPair> pairs(n);
    std::vector<std::exception_ptr> errors(n);
    auto encode_one = [&](std::size_t i) {
        try {
            const auto series = features.column(i);
            pairs[i] = encode_feature(series);
        } catch (const Error& e) {
            if (e.code() == Errc::DegenerateSeries)
                errors[i] = std::make_exception_ptr(
                    Error(Errc::DegenerateSeries, "feature '" + features.feature_names[i] + "' is constant"));
            else
                errors[i] = std::current_exception();
        }
    };

    const unsigned workers = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(n)));
    if (workers == 1) {
        for (std::size_t i = 0; i < n; ++i) encode_one(i);
    } else {
        std::vector<std::jthread> pool;
        for (unsigned w = 0; w < workers; ++w)
            pool.emplace_back([&, w] {
                for (std::size_t i = w; i < n; i += workers) encode_one(i);
            });
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);

    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t p = 0; p < m * m; ++p) {
            image.pixels(p, 2 * i) = pairs[i].gasf.data[p];
            image.pixels(p, 2 * i + 1) = pairs[i].gadf.data[p];
        }
    }
    return image;
}

NormalizedSeries reconstruct_from_gasf(std::span<const double> diagonal) {
    NormalizedSeries out;
    out.values.resize(diagonal.size());
    for (std::size_t j = 0; j < diagonal.size(); ++j) {
        const double d = diagonal[j];
        if (!(d >= -1.0 - kClampTolerance && d <= 1.0 + kClampTolerance))
            raise(Errc::OutOfRange, "diagonal entry " + std::to_string(d) + " outside [-1, 1]");
        out.values[j] = std::sqrt((std::clamp(d, -1.0, 1.0) + 1.0) / 2.0);
    }
    return out;
}

unsigned char to_gray(double value) noexcept {
    const double scaled = std::round((value + 1.0) / 2.0 * 255.0);
    return static_cast<unsigned char>(std::clamp(scaled, 0.0, 255.0));
}

void render_channel(const MultiChannelImage& image, std::size_t channel, const std::filesystem::path& path) {
    if (channel >= image.channels())
        raise(Errc::ChannelOutOfBounds,
              "channel " + std::to_string(channel) + " of " + std::to_string(image.channels()));
    std::ofstream out(path, std::ios::binary);
    if (!out) raise(Errc::IoError, "cannot open " + path.string());
    out << "P5\n" << image.width << ' ' << image.height << "\n255\n";
    std::vector<unsigned char> row(image.width);
    for (std::size_t i = 0; i < image.height; ++i) {
        for (std::size_t j = 0; j < image.width; ++j) row[j] = to_gray(image.at(i, j, channel));
        out.write(reinterpret_cast<const char*>(row.data()), static_cast<std::streamsize>(row.size()));
    }
    if (!out) raise(Errc::IoError, "write failed for " + path.string());
}

} // namespace gafvit::gaf
