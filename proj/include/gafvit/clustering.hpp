#pragma once

// QuickBundles-style online clustering of feature matrices by the direction of
// their endpoint (last-row) vectors, with elbow-based threshold selection.

#include "gafvit/data.hpp"
#include "gafvit/gaf.hpp"

#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace gafvit::clustering {

struct EndpointFeature {
    std::vector<double> vector;
};

struct Centroid {
    std::vector<double> sum;    // running sum of member endpoint vectors
    std::vector<double> vector; // sum / count
    std::size_t count = 0;
};

// One online decision: sample i joined `cluster` at `distance` (or seeded it).
struct Decision {
    std::size_t sample;
    std::size_t cluster;
    double distance;
    bool seeded;
};

struct ClusterModel {
    double threshold = 0.0;
    std::vector<Centroid> centroids;
    std::vector<std::size_t> assignments; // sample index -> cluster id
    std::vector<Decision> log;

    std::size_t num_clusters() const noexcept { return centroids.size(); }
};

enum class DistanceForm {
    // d = arccos(clamp(a.b / |a||b|, -1, 1)) / pi
    Angular,
    // Evaluates cos() on the clamped ratio before arccos, i.e. the formula as
    // literally printed; kept only for comparison.
    LiteralCosOfRatio,
};

EndpointFeature endpoint_feature(const gaf::FeatureMatrix& features);
double cosine_distance(std::span<const double> a, std::span<const double> b,
                       DistanceForm form = DistanceForm::Angular);
double cosine_distance(const EndpointFeature& a, const EndpointFeature& b,
                       DistanceForm form = DistanceForm::Angular);

ClusterModel qb_cluster(const std::vector<gaf::FeatureMatrix>& dataset, double threshold,
                        DistanceForm form = DistanceForm::Angular);
ClusterModel qb_cluster(const std::vector<EndpointFeature>& endpoints, double threshold,
                        DistanceForm form = DistanceForm::Angular);

struct ElbowResult {
    double threshold = 0.0;
    std::vector<double> grid;
    std::vector<std::size_t> cluster_counts;
    // Set when the count curve is flat; threshold is then the smallest grid value.
    bool degenerate = false;
    std::string warning;
};

// Runs qb_cluster at every grid value and returns the point of largest
// discrete curvature k[i-1] - 2 k[i] + k[i+1] (first one on ties).
ElbowResult elbow_select(const std::vector<gaf::FeatureMatrix>& dataset, const std::vector<double>& grid,
                         DistanceForm form = DistanceForm::Angular);

// 0.02, 0.04, ..., 0.5
std::vector<double> default_grid();

struct ClassSummary {
    std::size_t label;
    std::size_t count;
    double speed_mean;
    double accel_std;
    double jerk_std;
};

struct LabeledDataset {
    std::vector<std::size_t> labels;        // per sample
    std::vector<std::size_t> cluster_to_label;
    std::vector<ClassSummary> summary;      // one row per label, ascending
};

// Renumbers clusters by descending size (ties keep cluster order) and computes
// per-class mean speed and pooled accel/jerk standard deviations. Assumes
// (speed, accel, jerk) columns.
LabeledDataset label_dataset(const ClusterModel& model, const std::vector<gaf::FeatureMatrix>& dataset);

// Class statistics for an already labeled dataset.
std::vector<ClassSummary> class_summary(const std::vector<gaf::FeatureMatrix>& dataset,
                                        const std::vector<std::size_t>& labels);

void write_summary_csv(const std::filesystem::path& path, const std::vector<ClassSummary>& summary);
void write_elbow_csv(const std::filesystem::path& path, const ElbowResult& elbow);

} // namespace gafvit::clustering
