#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace scmppi {

struct ConfusionCounts {
    std::int64_t tp = 0;
    std::int64_t fp = 0;
    std::int64_t tn = 0;
    std::int64_t fn = 0;

    std::int64_t total() const { return tp + fp + tn + fn; }
};

// Scores at or above the threshold count as predicted positive.
ConfusionCounts confusion(const std::vector<double>& scores, const std::vector<int>& labels,
                          double threshold = 0.5);

struct BasicMetrics {
    double acc = 0.0;
    double pre = 0.0;
    double sen = 0.0;  // recall
    double spe = 0.0;
    double f1 = 0.0;
    double mcc = 0.0;
    // Set when some denominator was zero and the value was pinned to 0.
    bool degenerate = false;
};

BasicMetrics basic_metrics(const ConfusionCounts& c);

// Rank-statistic AUC: fraction of (positive, negative) pairs ranked
// correctly, ties counted 1/2. Requires both classes.
double roc_auc(const std::vector<double>& scores, const std::vector<int>& labels);

// Average precision: mean over positives, in descending-score order, of the
// precision at that positive's cutoff. Ties are broken by stable original
// order. Requires at least one positive.
double auprc(const std::vector<double>& scores, const std::vector<int>& labels);

// All eight reported metrics at threshold 0.5.
struct MetricReport {
    BasicMetrics basic;
    double auc = 0.0;
    double auprc = 0.0;
};

MetricReport full_metrics(const std::vector<double>& scores, const std::vector<int>& labels);

// Column order used by every emitted report.
const std::vector<std::string>& metric_names();
std::vector<double> metric_values(const MetricReport& r);

}  // namespace scmppi
