#include "brassica/metrics.hpp"

#include <algorithm>
#include <cstdio>

namespace brassica {

ConfusionMatrix::ConfusionMatrix(int k_, std::vector<int64_t> counts_)
    : k(k_), counts(std::move(counts_)) {
    if (k < 1 || counts.size() != size_t(k) * size_t(k)) {
        throw ArgumentError("ConfusionMatrix: counts must be k*k");
    }
    for (int64_t c : counts) {
        if (c < 0) throw ArgumentError("ConfusionMatrix: negative count");
    }
}

int64_t ConfusionMatrix::row_sum(int t) const {
    int64_t s = 0;
    for (int p = 0; p < k; ++p) s += at(t, p);
    return s;
}

int64_t ConfusionMatrix::col_sum(int p) const {
    int64_t s = 0;
    for (int t = 0; t < k; ++t) s += at(t, p);
    return s;
}

int64_t ConfusionMatrix::total() const {
    int64_t s = 0;
    for (int64_t c : counts) s += c;
    return s;
}

int64_t ConfusionMatrix::trace() const {
    int64_t s = 0;
    for (int t = 0; t < k; ++t) s += at(t, t);
    return s;
}

ConfusionMatrix confusion(std::span<const int> truth, std::span<const int> predicted, int k) {
    if (truth.size() != predicted.size()) {
        throw ArgumentError("confusion: label lists differ in length");
    }
    if (k < 1) throw ArgumentError("confusion: k must be >= 1");
    ConfusionMatrix cm(k);
    for (size_t i = 0; i < truth.size(); ++i) {
        const int t = truth[i], p = predicted[i];
        if (t < 0 || t >= k || p < 0 || p >= k) {
            throw ArgumentError("confusion: label out of range at sample " + std::to_string(i));
        }
        cm.at(t, p) += 1;
    }
    return cm;
}

MetricsReport report(const ConfusionMatrix& cm) {
    const int64_t total = cm.total();
    if (cm.k < 1 || total == 0) throw ArgumentError("report: empty confusion matrix");

    MetricsReport r;
    r.total_support = total;
    r.per_class.resize(size_t(cm.k));

    double weighted_p = 0.0, weighted_f1 = 0.0;
    for (int i = 0; i < cm.k; ++i) {
        const int64_t tp = cm.at(i, i);
        const int64_t support = cm.row_sum(i);   // tp + fn
        const int64_t predicted = cm.col_sum(i);  // tp + fp
        const int64_t tn = total - support - predicted + tp;

        ClassMetrics& c = r.per_class[size_t(i)];
        c.support = support;
        c.precision = predicted > 0 ? double(tp) / double(predicted) : 0.0;
        c.recall = support > 0 ? double(tp) / double(support) : 0.0;
        const double pr = c.precision + c.recall;
        c.f1 = pr > 0 ? 2.0 * c.precision * c.recall / pr : 0.0;
        c.ovr_accuracy = double(tp + tn) / double(total);

        r.macro_precision += c.precision;
        r.macro_recall += c.recall;
        r.macro_f1 += c.f1;
        weighted_p += double(support) * c.precision;
        weighted_f1 += double(support) * c.f1;
    }
    r.macro_precision /= double(cm.k);
    r.macro_recall /= double(cm.k);
    r.macro_f1 /= double(cm.k);
    r.accuracy = double(cm.trace()) / double(total);
    r.weighted_precision = weighted_p / double(total);
    r.weighted_recall = r.accuracy;  // sum_i support_i * (tp_i/support_i) / total == trace/total
    r.weighted_f1 = weighted_f1 / double(total);
    return r;
}

namespace {

void check_names(const MetricsReport& r, std::span<const std::string> names) {
    if (names.size() != r.per_class.size()) {
        throw ArgumentError("render_report: got " + std::to_string(names.size()) +
                            " names for " + std::to_string(r.per_class.size()) + " classes");
    }
}

}  // namespace

std::string render_report_text(const MetricsReport& r, std::span<const std::string> names) {
    check_names(r, names);
    size_t label_w = 12;  // at least "weighted avg"
    for (const auto& n : names) label_w = std::max(label_w, n.size());

    std::string out;
    char buf[256];
    std::snprintf(buf, sizeof(buf), "%*s  %9s %9s %9s %9s\n", int(label_w), "", "precision",
                  "recall", "f1-score", "support");
    out += buf;
    out += "\n";
    for (size_t i = 0; i < names.size(); ++i) {
        const ClassMetrics& c = r.per_class[i];
        std::snprintf(buf, sizeof(buf), "%*s  %9.4f %9.4f %9.4f %9lld\n", int(label_w),
                      names[i].c_str(), c.precision, c.recall, c.f1,
                      static_cast<long long>(c.support));
        out += buf;
    }
    out += "\n";
    std::snprintf(buf, sizeof(buf), "%*s  %9s %9s %9.4f %9lld\n", int(label_w), "accuracy", "",
                  "", r.accuracy, static_cast<long long>(r.total_support));
    out += buf;
    std::snprintf(buf, sizeof(buf), "%*s  %9.4f %9.4f %9.4f %9lld\n", int(label_w), "macro avg",
                  r.macro_precision, r.macro_recall, r.macro_f1,
                  static_cast<long long>(r.total_support));
    out += buf;
    std::snprintf(buf, sizeof(buf), "%*s  %9.4f %9.4f %9.4f %9lld\n", int(label_w),
                  "weighted avg", r.weighted_precision, r.weighted_recall, r.weighted_f1,
                  static_cast<long long>(r.total_support));
    out += buf;
    return out;
}

std::string render_report_csv(const MetricsReport& r, std::span<const std::string> names) {
    check_names(r, names);
    std::string out = "class,precision,recall,f1,support\n";
    char buf[256];
    for (size_t i = 0; i < names.size(); ++i) {
        const ClassMetrics& c = r.per_class[i];
        std::snprintf(buf, sizeof(buf), "%s,%.4f,%.4f,%.4f,%lld\n", names[i].c_str(), c.precision,
                      c.recall, c.f1, static_cast<long long>(c.support));
        out += buf;
    }
    std::snprintf(buf, sizeof(buf), "accuracy,,,%.4f,%lld\n", r.accuracy,
                  static_cast<long long>(r.total_support));
    out += buf;
    std::snprintf(buf, sizeof(buf), "macro avg,%.4f,%.4f,%.4f,%lld\n", r.macro_precision,
                  r.macro_recall, r.macro_f1, static_cast<long long>(r.total_support));
    out += buf;
    std::snprintf(buf, sizeof(buf), "weighted avg,%.4f,%.4f,%.4f,%lld\n", r.weighted_precision,
                  r.weighted_recall, r.weighted_f1, static_cast<long long>(r.total_support));
    out += buf;
    return out;
}

std::string render_confusion_csv(const ConfusionMatrix& cm, std::span<const std::string> names) {
    if (names.size() != size_t(cm.k)) {
        throw ArgumentError("render_confusion_csv: name count mismatch");
    }
    std::string out = "true\\predicted";
    for (const auto& n : names) out += "," + n;
    out += "\n";
    for (int t = 0; t < cm.k; ++t) {
        out += names[size_t(t)];
        for (int p = 0; p < cm.k; ++p) out += "," + std::to_string(cm.at(t, p));
        out += "\n";
    }
    return out;
}

}  // namespace brassica
