#include "scmppi/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "scmppi/errors.hpp"

namespace scmppi {

namespace {

void check_lengths(const std::vector<double>& scores, const std::vector<int>& labels) {
    if (scores.size() != labels.size()) {
        throw DataError("metrics: " + std::to_string(scores.size()) + " scores vs " +
                        std::to_string(labels.size()) + " labels");
    }
    for (int y : labels) {
        if (y != 0 && y != 1) throw DataError("metrics: labels must be 0 or 1");
    }
}

}  // namespace

ConfusionCounts confusion(const std::vector<double>& scores, const std::vector<int>& labels,
                          double threshold) {
    check_lengths(scores, labels);
    ConfusionCounts c;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        const bool pred = scores[i] >= threshold;
        if (labels[i] == 1) {
            (pred ? c.tp : c.fn) += 1;
        } else {
            (pred ? c.fp : c.tn) += 1;
        }
    }
    return c;
}

BasicMetrics basic_metrics(const ConfusionCounts& c) {
    BasicMetrics m;
    auto ratio = [&m](double num, double den) {
        if (den == 0.0) {
            m.degenerate = true;
            return 0.0;
        }
        return num / den;
    };
    const double tp = static_cast<double>(c.tp), fp = static_cast<double>(c.fp);
    const double tn = static_cast<double>(c.tn), fn = static_cast<double>(c.fn);
    m.acc = ratio(tp + tn, tp + tn + fp + fn);
    m.pre = ratio(tp, tp + fp);
    m.sen = ratio(tp, tp + fn);
    m.spe = ratio(tn, tn + fp);
    m.f1 = ratio(2.0 * m.pre * m.sen, m.pre + m.sen);
    const double root = std::sqrt((tp + fp) * (tp + fn) * (tn + fp) * (tn + fn));
    m.mcc = ratio(tp * tn - fp * fn, root);
    return m;
}

double roc_auc(const std::vector<double>& scores, const std::vector<int>& labels) {
    check_lengths(scores, labels);
    std::int64_t pos = std::accumulate(labels.begin(), labels.end(), std::int64_t{0});
    std::int64_t neg = static_cast<std::int64_t>(labels.size()) - pos;
    if (pos == 0 || neg == 0) {
        throw NumericError("roc_auc: undefined, needs at least one positive and one negative");
    }
    // Sort once, then credit each positive with the count of lower-scored
    // negatives plus half the tied ones.
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
    double credit = 0.0;
    std::int64_t negs_below = 0;
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        std::int64_t tie_pos = 0, tie_neg = 0;
        while (j < order.size() && scores[order[j]] == scores[order[i]]) {
            (labels[order[j]] == 1 ? tie_pos : tie_neg) += 1;
            ++j;
        }
        credit += static_cast<double>(tie_pos) *
                  (static_cast<double>(negs_below) + 0.5 * static_cast<double>(tie_neg));
        negs_below += tie_neg;
        i = j;
    }
    return credit / (static_cast<double>(pos) * static_cast<double>(neg));
}

double auprc(const std::vector<double>& scores, const std::vector<int>& labels) {
    check_lengths(scores, labels);
    const std::int64_t pos = std::accumulate(labels.begin(), labels.end(), std::int64_t{0});
    if (pos == 0) throw NumericError("auprc: undefined without positive samples");
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
    double ap = 0.0;
    std::int64_t tp = 0;
    for (std::size_t rank = 0; rank < order.size(); ++rank) {
        if (labels[order[rank]] == 1) {
            tp += 1;
            ap += static_cast<double>(tp) / static_cast<double>(rank + 1);
        }
    }
    return ap / static_cast<double>(pos);
}

MetricReport full_metrics(const std::vector<double>& scores, const std::vector<int>& labels) {
    MetricReport r;
    r.basic = basic_metrics(confusion(scores, labels, 0.5));
    r.auc = roc_auc(scores, labels);
    r.auprc = auprc(scores, labels);
    return r;
}

const std::vector<std::string>& metric_names() {
    static const std::vector<std::string> names = {"acc", "pre", "sen", "spe",
                                                   "f1",  "mcc", "auc", "auprc"};
    return names;
}

std::vector<double> metric_values(const MetricReport& r) {
    return {r.basic.acc, r.basic.pre, r.basic.sen, r.basic.spe,
            r.basic.f1,  r.basic.mcc, r.auc,       r.auprc};
}

}  // namespace scmppi
