#pragma once

// Confusion matrix and one-vs-rest accuracy/precision/recall/F1.

#include "json.hpp"

#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace gafvit::metrics {

struct ConfusionMatrix {
    std::size_t classes = 0;
    std::vector<std::vector<std::size_t>> counts; // [true][predicted]

    std::size_t total() const;
    std::size_t trace() const;
};

struct ClassMetrics {
    std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
    double accuracy = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    // Set when the metric had a zero denominator and was reported as 0.
    bool precision_undefined = false;
    bool recall_undefined = false;
    bool f1_undefined = false;
};

struct Report {
    std::vector<ClassMetrics> per_class;
    double accuracy = 0.0; // trace / total
    // Unweighted means over all classes, flagged ones included.
    double macro_precision = 0.0;
    double macro_recall = 0.0;
    double macro_f1 = 0.0;
    double macro_accuracy = 0.0;
};

ConfusionMatrix confusion(std::span<const std::size_t> truth, std::span<const std::size_t> predicted,
                          std::size_t classes);
Report report(const ConfusionMatrix& cm);

nlohmann::json to_json(const Report& r, const ConfusionMatrix& cm);
std::string to_table(const Report& r);
void write_confusion_csv(const std::filesystem::path& path, const ConfusionMatrix& cm);

} // namespace gafvit::metrics
