#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "brassica/errors.hpp"

namespace brassica {

// K x K count matrix; rows are true classes, columns predicted classes.
struct ConfusionMatrix {
    int k = 0;
    std::vector<int64_t> counts;  // row-major

    ConfusionMatrix() = default;
    explicit ConfusionMatrix(int k_) : k(k_), counts(size_t(k_) * size_t(k_), 0) {}
    ConfusionMatrix(int k_, std::vector<int64_t> counts_);

    int64_t& at(int t, int p) { return counts[size_t(t) * size_t(k) + size_t(p)]; }
    int64_t at(int t, int p) const { return counts[size_t(t) * size_t(k) + size_t(p)]; }

    int64_t row_sum(int t) const;  // class-t support
    int64_t col_sum(int p) const;
    int64_t total() const;
    int64_t trace() const;
};

ConfusionMatrix confusion(std::span<const int> truth, std::span<const int> predicted, int k);

struct ClassMetrics {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    // One-vs-rest accuracy (TP+TN)/total; the per-class reading of the
    // accuracy formula, exposed alongside the multiclass trace/total value.
    double ovr_accuracy = 0.0;
    int64_t support = 0;
};

struct MetricsReport {
    std::vector<ClassMetrics> per_class;
    double accuracy = 0.0;
    double macro_precision = 0.0, macro_recall = 0.0, macro_f1 = 0.0;
    double weighted_precision = 0.0, weighted_recall = 0.0, weighted_f1 = 0.0;
    int64_t total_support = 0;
};

// Per-class precision/recall/F1/support with macro and support-weighted
// aggregates. Zero-denominator metrics report 0. The weighted recall is
// computed as trace/total, which it equals algebraically, so the identity
// "weighted recall == accuracy" holds exactly.
MetricsReport report(const ConfusionMatrix& cm);

// Fixed-width table in the classification-report layout: one row per class,
// then accuracy / macro avg / weighted avg rows, all values to 4 decimals.
std::string render_report_text(const MetricsReport& r, std::span<const std::string> names);

// CSV twin: class,precision,recall,f1,support then the three summary rows.
std::string render_report_csv(const MetricsReport& r, std::span<const std::string> names);

// Row-major integer CSV with a class-name header row.
std::string render_confusion_csv(const ConfusionMatrix& cm, std::span<const std::string> names);

}  // namespace brassica
