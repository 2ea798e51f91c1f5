#include "gafvit/clustering.hpp"

#include "gafvit/error.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>

namespace gafvit::clustering {

EndpointFeature endpoint_feature(const gaf::FeatureMatrix& features) {
    if (features.steps() == 0) raise(Errc::EmptyMatrix, "feature matrix has no rows");
    const auto last = features.values.row(features.steps() - 1);
    EndpointFeature out{{last.begin(), last.end()}};
    const bool zero = std::all_of(out.vector.begin(), out.vector.end(), [](double v) { return v == 0.0; });
    if (zero) raise(Errc::ZeroVector, "endpoint feature has zero magnitude");
    return out;
}

double cosine_distance(std::span<const double> a, std::span<const double> b, DistanceForm form) {
    if (a.size() != b.size()) raise(Errc::DimensionMismatch, "endpoint vectors differ in length");
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    if (na == 0.0 || nb == 0.0) raise(Errc::ZeroVector, "cosine distance of a zero vector");
    double ratio = dot / (std::sqrt(na) * std::sqrt(nb));
    if (form == DistanceForm::LiteralCosOfRatio) ratio = std::cos(ratio);
    return std::acos(std::clamp(ratio, -1.0, 1.0)) / std::numbers::pi;
}

double cosine_distance(const EndpointFeature& a, const EndpointFeature& b, DistanceForm form) {
    return cosine_distance(std::span<const double>(a.vector), std::span<const double>(b.vector), form);
}

ClusterModel qb_cluster(const std::vector<EndpointFeature>& endpoints, double threshold, DistanceForm form) {
    if (endpoints.empty()) raise(Errc::EmptyMatrix, "cannot cluster an empty dataset");
    if (!(threshold > 0.0 && threshold <= 1.0)) raise(Errc::InvalidArgument, "threshold must be in (0, 1]");
    ClusterModel model;
    model.threshold = threshold;
    model.assignments.resize(endpoints.size());
    for (std::size_t i = 0; i < endpoints.size(); ++i) {
        const auto& v = endpoints[i].vector;
        std::size_t best = 0;
        double best_d = std::numeric_limits<double>::infinity();
        for (std::size_t c = 0; c < model.centroids.size(); ++c) {
            const double d = cosine_distance(v, model.centroids[c].vector, form);
            if (d < best_d) {
                best_d = d;
                best = c;
            }
        }
        if (!model.centroids.empty() && best_d <= threshold) {
            auto& cen = model.centroids[best];
            ++cen.count;
            for (std::size_t k = 0; k < v.size(); ++k) {
                cen.sum[k] += v[k];
                cen.vector[k] = cen.sum[k] / static_cast<double>(cen.count);
            }
            model.assignments[i] = best;
            model.log.push_back({i, best, best_d, false});
        } else {
            model.centroids.push_back(Centroid{v, v, 1});
            model.assignments[i] = model.centroids.size() - 1;
            model.log.push_back({i, model.centroids.size() - 1, 0.0, true});
        }
    }
    return model;
}

ClusterModel qb_cluster(const std::vector<gaf::FeatureMatrix>& dataset, double threshold, DistanceForm form) {
    std::vector<EndpointFeature> endpoints;
    endpoints.reserve(dataset.size());
    for (std::size_t i = 0; i < dataset.size(); ++i) {
        try {
            endpoints.push_back(endpoint_feature(dataset[i]));
        } catch (const Error& e) {
            raise(e.code(), "sample " + std::to_string(i) + ": " + e.what());
        }
    }
    return qb_cluster(endpoints, threshold, form);
}

std::vector<double> default_grid() {
    std::vector<double> grid;
    for (int i = 1; i <= 25; ++i) grid.push_back(0.02 * i);
    return grid;
}

ElbowResult elbow_select(const std::vector<gaf::FeatureMatrix>& dataset, const std::vector<double>& grid,
                         DistanceForm form) {
    if (grid.size() < 3) raise(Errc::InvalidArgument, "elbow grid needs at least 3 points");
    if (!std::is_sorted(grid.begin(), grid.end())) raise(Errc::InvalidArgument, "elbow grid must be ascending");
    std::vector<EndpointFeature> endpoints;
    for (std::size_t i = 0; i < dataset.size(); ++i) {
        try {
            endpoints.push_back(endpoint_feature(dataset[i]));
        } catch (const Error& e) {
            raise(e.code(), "sample " + std::to_string(i) + ": " + e.what());
        }
    }
    ElbowResult out;
    out.grid = grid;
    for (double theta : grid) out.cluster_counts.push_back(qb_cluster(endpoints, theta, form).num_clusters());

    const auto& k = out.cluster_counts;
    if (std::all_of(k.begin(), k.end(), [&](std::size_t v) { return v == k.front(); })) {
        out.degenerate = true;
        out.threshold = grid.front();
        out.warning = "cluster count is constant (" + std::to_string(k.front()) +
                      ") over the grid; using the smallest threshold";
        return out;
    }
    std::size_t best = 1;
    double best_curv = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i + 1 < k.size(); ++i) {
        const double curv = static_cast<double>(k[i - 1]) - 2.0 * static_cast<double>(k[i]) + static_cast<double>(k[i + 1]);
        if (curv > best_curv) {
            best_curv = curv;
            best = i;
        }
    }
    out.threshold = grid[best];
    return out;
}

std::vector<ClassSummary> class_summary(const std::vector<gaf::FeatureMatrix>& dataset,
                                        const std::vector<std::size_t>& labels) {
    if (dataset.size() != labels.size()) raise(Errc::LengthMismatch, "labels and dataset differ in length");
    const std::size_t classes = labels.empty() ? 0 : *std::max_element(labels.begin(), labels.end()) + 1;
    struct Acc {
        std::size_t count = 0, points = 0;
        double speed = 0.0, a = 0.0, a2 = 0.0, j = 0.0, j2 = 0.0;
    };
    std::vector<Acc> acc(classes);
    for (std::size_t i = 0; i < dataset.size(); ++i) {
        const auto& f = dataset[i];
        if (f.features() < 3) raise(Errc::DimensionMismatch, "class summary needs speed, accel and jerk columns");
        Acc& s = acc[labels[i]];
        ++s.count;
        for (std::size_t r = 0; r < f.steps(); ++r) {
            ++s.points;
            s.speed += f.values(r, 0);
            s.a += f.values(r, 1);
            s.a2 += f.values(r, 1) * f.values(r, 1);
            s.j += f.values(r, 2);
            s.j2 += f.values(r, 2) * f.values(r, 2);
        }
    }
    std::vector<ClassSummary> out;
    for (std::size_t c = 0; c < classes; ++c) {
        const Acc& s = acc[c];
        if (s.count == 0) {
            out.push_back({c, 0, 0.0, 0.0, 0.0});
            continue;
        }
        const double n = static_cast<double>(s.points);
        auto stddev = [n](double sum, double sum2) { return std::sqrt(std::max(0.0, sum2 / n - (sum / n) * (sum / n))); };
        out.push_back({c, s.count, s.speed / n, stddev(s.a, s.a2), stddev(s.j, s.j2)});
    }
    return out;
}

LabeledDataset label_dataset(const ClusterModel& model, const std::vector<gaf::FeatureMatrix>& dataset) {
    if (model.assignments.size() != dataset.size())
        raise(Errc::LengthMismatch, "cluster model was fitted on a different dataset");
    std::vector<std::size_t> order(model.num_clusters());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return model.centroids[a].count > model.centroids[b].count;
    });
    LabeledDataset out;
    out.cluster_to_label.resize(order.size());
    for (std::size_t label = 0; label < order.size(); ++label) out.cluster_to_label[order[label]] = label;
    out.labels.reserve(dataset.size());
    for (std::size_t cluster : model.assignments) out.labels.push_back(out.cluster_to_label[cluster]);
    out.summary = class_summary(dataset, out.labels);
    return out;
}

void write_summary_csv(const std::filesystem::path& path, const std::vector<ClassSummary>& summary) {
    std::ofstream out(path);
    if (!out) raise(Errc::IoError, "cannot open " + path.string());
    out << "class,count,speed_mean,accel_std,jerk_std\n";
    out.precision(6);
    out << std::fixed;
    for (const auto& s : summary)
        out << s.label << ',' << s.count << ',' << s.speed_mean << ',' << s.accel_std << ',' << s.jerk_std << '\n';
}

void write_elbow_csv(const std::filesystem::path& path, const ElbowResult& elbow) {
    std::ofstream out(path);
    if (!out) raise(Errc::IoError, "cannot open " + path.string());
    out << "threshold,clusters\n";
    for (std::size_t i = 0; i < elbow.grid.size(); ++i) out << elbow.grid[i] << ',' << elbow.cluster_counts[i] << '\n';
}

} // namespace gafvit::clustering
