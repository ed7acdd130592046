#include <cstdio>
#include <sstream>

#include "latsteer/error.hpp"
#include "latsteer/eval.hpp"

namespace latsteer {
namespace {

double ratio(std::size_t num, std::size_t den) {
    return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

double harmonic(double p, double r) { return p + r == 0.0 ? 0.0 : 2.0 * p * r / (p + r); }

nlohmann::json metrics_json(const ClassMetrics& m) {
    return {{"precision", m.precision}, {"recall", m.recall}, {"f1", m.f1}, {"support", m.support}};
}

}  // namespace

ClassReport classification_report(std::span<const std::size_t> y_true, std::span<const std::size_t> y_pred,
                                  std::size_t num_classes) {
    if (y_true.size() != y_pred.size()) throw ValidationError("classification_report: label counts differ");
    if (y_true.empty()) throw ValidationError("classification_report: no samples");
    if (num_classes == 0) throw ValidationError("classification_report: K must be >= 1");

    std::vector<std::size_t> tp(num_classes), fp(num_classes), fn(num_classes), support(num_classes);
    for (std::size_t i = 0; i < y_true.size(); ++i) {
        const std::size_t t = y_true[i], p = y_pred[i];
        if (t >= num_classes || p >= num_classes) {
            throw ValidationError("classification_report: label " + std::to_string(std::max(t, p)) +
                                  " at index " + std::to_string(i) + " is not < K=" + std::to_string(num_classes));
        }
        ++support[t];
        if (t == p) {
            ++tp[t];
        } else {
            ++fp[p];
            ++fn[t];
        }
    }

    ClassReport r;
    const std::size_t n = y_true.size();
    r.total = n;
    std::size_t correct = 0;
    double macro_p = 0, macro_r = 0, macro_f = 0, w_p = 0, w_f = 0;
    for (std::size_t k = 0; k < num_classes; ++k) {
        ClassMetrics m;
        m.precision = ratio(tp[k], tp[k] + fp[k]);
        m.recall = ratio(tp[k], tp[k] + fn[k]);
        m.f1 = harmonic(m.precision, m.recall);
        m.support = support[k];
        r.per_class.push_back(m);
        correct += tp[k];
        macro_p += m.precision;
        macro_r += m.recall;
        macro_f += m.f1;
        w_p += static_cast<double>(m.support) * m.precision;
        w_f += static_cast<double>(m.support) * m.f1;
    }
    const double kd = static_cast<double>(num_classes), nd = static_cast<double>(n);
    r.accuracy = ratio(correct, n);
    r.macro = {macro_p / kd, macro_r / kd, macro_f / kd, n};
    // support_k * recall_k is exactly TP_k, so the weighted recall is the accuracy.
    r.weighted = {w_p / nd, r.accuracy, w_f / nd, n};
    return r;
}

nlohmann::json to_json(const ClassReport& report) {
    nlohmann::json classes = nlohmann::json::array();
    for (const auto& m : report.per_class) classes.push_back(metrics_json(m));
    return {{"per_class", classes},
            {"accuracy", report.accuracy},
            {"macro_avg", metrics_json(report.macro)},
            {"weighted_avg", metrics_json(report.weighted)},
            {"total", report.total}};
}

std::string render_table(const ClassReport& report) {
    std::ostringstream out;
    char line[128];
    std::snprintf(line, sizeof line, "%-14s%11s%11s%11s%11s\n", "", "precision", "recall", "f1-score", "support");
    out << line;
    for (std::size_t k = 0; k < report.per_class.size(); ++k) {
        const auto& m = report.per_class[k];
        const std::string name = "class " + std::to_string(k);
        std::snprintf(line, sizeof line, "%-14s%11.2f%11.2f%11.2f%11zu\n", name.c_str(), m.precision, m.recall, m.f1,
                      m.support);
        out << line;
    }
    out << "\n";
    std::snprintf(line, sizeof line, "%-14s%11s%11s%11.2f%11zu\n", "accuracy", "", "", report.accuracy, report.total);
    out << line;
    for (auto [name, m] : {std::pair{"macro avg", report.macro}, std::pair{"weighted avg", report.weighted}}) {
        std::snprintf(line, sizeof line, "%-14s%11.2f%11.2f%11.2f%11zu\n", name, m.precision, m.recall, m.f1,
                      m.support);
        out << line;
    }
    return out.str();
}

}  // namespace latsteer
