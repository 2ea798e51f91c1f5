#include "gafvit/metrics.hpp"

#include "gafvit/error.hpp"

#include <cstdio>
#include <fstream>

namespace gafvit::metrics {

std::size_t ConfusionMatrix::total() const {
    std::size_t n = 0;
    for (const auto& row : counts)
        for (std::size_t c : row) n += c;
    return n;
}

std::size_t ConfusionMatrix::trace() const {
    std::size_t n = 0;
    for (std::size_t k = 0; k < classes; ++k) n += counts[k][k];
    return n;
}

ConfusionMatrix confusion(std::span<const std::size_t> truth, std::span<const std::size_t> predicted,
                          std::size_t classes) {
    if (truth.size() != predicted.size())
        raise(Errc::LengthMismatch, std::to_string(truth.size()) + " labels vs " + std::to_string(predicted.size()) +
                                        " predictions");
    ConfusionMatrix cm{classes, std::vector<std::vector<std::size_t>>(classes, std::vector<std::size_t>(classes, 0))};
    for (std::size_t i = 0; i < truth.size(); ++i) {
        if (truth[i] >= classes || predicted[i] >= classes)
            raise(Errc::LabelOutOfRange, "sample " + std::to_string(i) + " has a label outside [0, " +
                                             std::to_string(classes) + ")");
        ++cm.counts[truth[i]][predicted[i]];
    }
    return cm;
}

Report report(const ConfusionMatrix& cm) {
    const std::size_t total = cm.total();
    if (cm.classes == 0 || total == 0) raise(Errc::EmptyMatrix, "confusion matrix is empty");
    Report r;
    const double n = static_cast<double>(total);
    for (std::size_t k = 0; k < cm.classes; ++k) {
        ClassMetrics m;
        std::size_t row = 0, col = 0;
        for (std::size_t j = 0; j < cm.classes; ++j) {
            row += cm.counts[k][j];
            col += cm.counts[j][k];
        }
        m.tp = cm.counts[k][k];
        m.fp = col - m.tp;
        m.fn = row - m.tp;
        m.tn = total - m.tp - m.fp - m.fn;
        m.accuracy = static_cast<double>(m.tp + m.tn) / n;
        if (m.tp + m.fp == 0) m.precision_undefined = true;
        else m.precision = static_cast<double>(m.tp) / static_cast<double>(m.tp + m.fp);
        if (m.tp + m.fn == 0) m.recall_undefined = true;
        else m.recall = static_cast<double>(m.tp) / static_cast<double>(m.tp + m.fn);
        if (m.precision + m.recall == 0.0) m.f1_undefined = true;
        else m.f1 = 2.0 * m.precision * m.recall / (m.precision + m.recall);
        r.per_class.push_back(m);
    }
    const double k = static_cast<double>(cm.classes);
    for (const auto& m : r.per_class) {
        r.macro_precision += m.precision / k;
        r.macro_recall += m.recall / k;
        r.macro_f1 += m.f1 / k;
        r.macro_accuracy += m.accuracy / k;
    }
    r.accuracy = static_cast<double>(cm.trace()) / n;
    return r;
}

nlohmann::json to_json(const Report& r, const ConfusionMatrix& cm) {
    nlohmann::json j;
    j["accuracy"] = r.accuracy;
    j["macro"] = {{"accuracy", r.macro_accuracy},
                  {"precision", r.macro_precision},
                  {"recall", r.macro_recall},
                  {"f1", r.macro_f1}};
    auto classes = nlohmann::json::array();
    for (std::size_t k = 0; k < r.per_class.size(); ++k) {
        const auto& m = r.per_class[k];
        classes.push_back({{"class", k},
                           {"tp", m.tp},
                           {"fp", m.fp},
                           {"fn", m.fn},
                           {"tn", m.tn},
                           {"accuracy", m.accuracy},
                           {"precision", m.precision},
                           {"recall", m.recall},
                           {"f1", m.f1},
                           {"precision_undefined", m.precision_undefined},
                           {"recall_undefined", m.recall_undefined},
                           {"f1_undefined", m.f1_undefined}});
    }
    j["per_class"] = std::move(classes);
    j["confusion"] = cm.counts;
    j["total"] = cm.total();
    return j;
}

std::string to_table(const Report& r) {
    std::string out;
    char buf[160];
    std::snprintf(buf, sizeof buf, "%-7s %9s %9s %9s %9s\n", "class", "accuracy", "precision", "recall", "f1");
    out += buf;
    for (std::size_t k = 0; k < r.per_class.size(); ++k) {
        const auto& m = r.per_class[k];
        std::snprintf(buf, sizeof buf, "%-7zu %9.4f %9.4f%s %8.4f%s %8.4f%s\n", k, m.accuracy, m.precision,
                      m.precision_undefined ? "*" : " ", m.recall, m.recall_undefined ? "*" : " ", m.f1,
                      m.f1_undefined ? "*" : " ");
        out += buf;
    }
    std::snprintf(buf, sizeof buf, "%-7s %9.4f %9.4f  %8.4f  %8.4f\n", "macro", r.macro_accuracy, r.macro_precision,
                  r.macro_recall, r.macro_f1);
    out += buf;
    std::snprintf(buf, sizeof buf, "overall accuracy %.4f\n", r.accuracy);
    out += buf;
    bool flagged = false;
    for (const auto& m : r.per_class) flagged |= m.precision_undefined || m.recall_undefined || m.f1_undefined;
    if (flagged) out += "* zero denominator, reported as 0\n";
    return out;
}

void write_confusion_csv(const std::filesystem::path& path, const ConfusionMatrix& cm) {
    std::ofstream out(path);
    if (!out) raise(Errc::IoError, "cannot open " + path.string());
    out << "true\\pred";
    for (std::size_t k = 0; k < cm.classes; ++k) out << ',' << k;
    out << '\n';
    for (std::size_t t = 0; t < cm.classes; ++t) {
        out << t;
        for (std::size_t p = 0; p < cm.classes; ++p) out << ',' << cm.counts[t][p];
        out << '\n';
    }
}

} // namespace gafvit::metrics
