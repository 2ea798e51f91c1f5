#pragma once

// Gramian angular field encoding of multivariate series into multi-channel
// images.

#include "gafvit/matrix.hpp"

#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace gafvit::gaf {

// m x n sequence: row j is time step j, column i is feature i.
struct FeatureMatrix {
    Matrix values;
    std::vector<std::string> feature_names;
    double dt = 0.1;

    std::size_t steps() const noexcept { return values.rows; }
    std::size_t features() const noexcept { return values.cols; }
    std::vector<double> column(std::size_t i) const;

    // Throws on m < 2, n < 1, non-finite entries, or bad feature names.
    void validate() const;
};

struct NormalizedSeries {
    std::vector<double> values;
};

struct PolarSeries {
    std::vector<double> angles; // arccos of the normalized values, in [0, pi/2]
    std::vector<double> radii;  // j / m for 1-based j; not used by the fields
};

struct GafPair {
    Matrix gasf;
    Matrix gadf;
};

// H x W x C image stored with the channel index fastest: pixels(i * W + j, c).
struct MultiChannelImage {
    std::size_t height = 0;
    std::size_t width = 0;
    Matrix pixels; // (H * W) x C
    std::vector<std::string> channel_names;

    std::size_t channels() const noexcept { return pixels.cols; }
    double at(std::size_t i, std::size_t j, std::size_t c) const noexcept { return pixels(i * width + j, c); }
    Matrix channel(std::size_t c) const;
};

// Values may fall outside [0, 1] by at most this much before the polar
// transform rejects them.
inline constexpr double kClampTolerance = 1e-9;

NormalizedSeries normalize_series(std::span<const double> series);
PolarSeries to_polar(const NormalizedSeries& norm);
Matrix gasf(const NormalizedSeries& norm);
Matrix gadf(const NormalizedSeries& norm);
GafPair encode_feature(std::span<const double> series);

// Channels are interleaved per feature: [gasf_0, gadf_0, gasf_1, gadf_1, ...],
// named "<feature>/gasf" and "<feature>/gadf". Features are encoded on up to
// `threads` threads; the output does not depend on the thread count.
MultiChannelImage encode_matrix(const FeatureMatrix& features, unsigned threads = 1);

// Inverse of the summation field diagonal, 2 f^2 - 1, for f >= 0.
NormalizedSeries reconstruct_from_gasf(std::span<const double> diagonal);

// 8-bit grayscale mapping of a field value in [-1, 1].
unsigned char to_gray(double value) noexcept;

// Writes one channel as binary PGM (P5).
void render_channel(const MultiChannelImage& image, std::size_t channel, const std::filesystem::path& path);

} // namespace gafvit::gaf
