#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "scmppi/errors.hpp"
#include "scmppi/kernels.hpp"
#include "scmppi/tensor.hpp"

namespace scmppi {

enum class ContrastMode { PairLabel, ProteinAnchor };

// Batch of unit-norm projections. In pair-label mode the positive set of
// anchor i is every other row with the same binary label; in protein-anchor
// mode the caller supplies explicit positive sets (in-batch binding
// partners).
struct ContrastBatch {
    Tensor z;                 // [M, d]
    std::vector<int> labels;  // M entries, {0,1} in pair-label mode
    ContrastMode mode = ContrastMode::PairLabel;
    std::vector<std::vector<int>> positives;  // protein-anchor mode only
};

struct ContrastConfig {
    double temperature = 0.1;
    double neg_threshold = 0.7;
    double eps = 1e-8;
};

struct FilterReport {
    std::int64_t discarded_negatives = 0;
    std::vector<std::int64_t> discarded_per_anchor;
    std::int64_t skipped_anchors = 0;  // anchors with no positives
};

template <typename T>
struct ContrastLoss {
    double value = 0.0;
    std::vector<T> dz;  // d(value)/dZ, row-major [M, d]
    FilterReport report;
};

double cosine_score(const std::vector<float>& a, const std::vector<float>& b, double eps = 1e-8);

namespace detail {

// Shared kernel behind SimCLR, SupCon, and the filtered variant. All sums
// run in 64-bit in a fixed order so the value agrees with a naive
// direct-summation oracle to machine precision.
//
// For each anchor i with a nonempty positive set P(i), with s_ia = z_i.z_a:
//   loss_i = -(1/|P(i)|) * sum_{p in P(i)} [ s_ip/tau - log Z_i ]
//   Z_i    = sum_{a kept} exp(s_ia/tau)
// where positives are always kept and, when filtering is on, a negative a
// is kept iff its cosine score (dot over norms + eps) is <= neg_threshold.
// The filter mask is a constant in the gradient.
template <typename T>
ContrastLoss<T> contrastive_core(const T* z, int m, int dim,
                                 const std::vector<std::vector<int>>& positives, double temperature,
                                 bool filter, double neg_threshold, double eps) {
    if (temperature <= 0.0) throw DataError("contrastive: temperature must be positive");
    ContrastLoss<T> out;
    out.dz.assign(static_cast<std::size_t>(m) * dim, T(0));
    out.report.discarded_per_anchor.assign(static_cast<std::size_t>(m), 0);

    std::vector<double> norms(static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i) {
        norms[static_cast<std::size_t>(i)] = std::sqrt(
            kernels::dot(z + static_cast<std::size_t>(i) * dim, z + static_cast<std::size_t>(i) * dim,
                         static_cast<std::size_t>(dim)));
    }

    std::vector<double> s(static_cast<std::size_t>(m));
    std::vector<char> kept(static_cast<std::size_t>(m));
    std::vector<char> is_pos(static_cast<std::size_t>(m));
    std::vector<double> ds(static_cast<std::size_t>(m));
    int active_anchors = 0;

    for (int i = 0; i < m; ++i) {
        const auto& pos = positives[static_cast<std::size_t>(i)];
        if (pos.empty()) {
            out.report.skipped_anchors += 1;
            continue;
        }
        active_anchors += 1;
        std::fill(is_pos.begin(), is_pos.end(), 0);
        for (int p : pos) {
            if (p == i || p < 0 || p >= m) throw DataError("contrastive: invalid positive index");
            is_pos[static_cast<std::size_t>(p)] = 1;
        }
        const T* zi = z + static_cast<std::size_t>(i) * dim;
        for (int a = 0; a < m; ++a) {
            if (a == i) continue;
            s[static_cast<std::size_t>(a)] = kernels::dot(
                zi, z + static_cast<std::size_t>(a) * dim, static_cast<std::size_t>(dim));
        }
        double zsum = 0.0;
        for (int a = 0; a < m; ++a) {
            if (a == i) {
                kept[static_cast<std::size_t>(a)] = 0;
                continue;
            }
            bool keep = true;
            if (filter && !is_pos[static_cast<std::size_t>(a)]) {
                const double cos = s[static_cast<std::size_t>(a)] /
                                   (norms[static_cast<std::size_t>(i)] *
                                        norms[static_cast<std::size_t>(a)] +
                                    eps);
                keep = cos <= neg_threshold;
                if (!keep) {
                    out.report.discarded_negatives += 1;
                    out.report.discarded_per_anchor[static_cast<std::size_t>(i)] += 1;
                }
            }
            kept[static_cast<std::size_t>(a)] = keep ? 1 : 0;
            if (keep) zsum += std::exp(s[static_cast<std::size_t>(a)] / temperature);
        }
        const double log_z = std::log(zsum);
        const double inv_p = 1.0 / static_cast<double>(pos.size());
        for (int p : pos) {
            out.value -= inv_p * (s[static_cast<std::size_t>(p)] / temperature - log_z);
        }
        // d(loss_i)/d(s_ia): softmax over the kept set minus the positive
        // indicator scaled by 1/|P(i)|, all divided by tau.
        std::fill(ds.begin(), ds.end(), 0.0);
        for (int a = 0; a < m; ++a) {
            if (a == i || !kept[static_cast<std::size_t>(a)]) continue;
            ds[static_cast<std::size_t>(a)] =
                std::exp(s[static_cast<std::size_t>(a)] / temperature) / (zsum * temperature);
        }
        for (int p : pos) ds[static_cast<std::size_t>(p)] -= inv_p / temperature;
        for (int a = 0; a < m; ++a) {
            if (a == i) continue;
            const double c = ds[static_cast<std::size_t>(a)];
            if (c == 0.0) continue;
            kernels::axpy(static_cast<T>(c), z + static_cast<std::size_t>(a) * dim,
                          out.dz.data() + static_cast<std::size_t>(i) * dim,
                          static_cast<std::size_t>(dim));
            kernels::axpy(static_cast<T>(c), zi,
                          out.dz.data() + static_cast<std::size_t>(a) * dim,
                          static_cast<std::size_t>(dim));
        }
    }
    if (active_anchors == 0) {
        throw DataError("contrastive: degenerate batch, every anchor has an empty positive set");
    }
    return out;
}

std::vector<std::vector<int>> positives_from_labels(const std::vector<int>& labels);

}  // namespace detail

// SimCLR: one positive per anchor, given by the explicit pairing j(i).
ContrastLoss<float> simclr_loss(const Tensor& z, const std::vector<int>& pairing,
                                double temperature);

// Supervised contrastive loss without filtering.
ContrastLoss<float> supcon_loss(const ContrastBatch& batch, double temperature);

// Filtered supervised loss: negatives whose cosine score exceeds
// neg_threshold are dropped from every denominator; positives never are.
ContrastLoss<float> psup_loss(const ContrastBatch& batch, double temperature, double neg_threshold,
                              double eps = 1e-8);

// Appends the filtered loss to a tape, downstream of `stacked` ([M, d]).
template <typename T>
typename TapeT<T>::Value psup_loss_node(TapeT<T>& tape, typename TapeT<T>::Value stacked,
                                        const std::vector<std::vector<int>>& positives,
                                        const ContrastConfig& cfg, FilterReport* report) {
    const auto& zt = tape.val(stacked);
    if (zt.shape.size() != 2) throw DataError("contrastive: stacked batch must be [M, d]");
    auto loss = detail::contrastive_core<T>(zt.data.data(), zt.shape[0], zt.shape[1], positives,
                                            cfg.temperature, true, cfg.neg_threshold, cfg.eps);
    if (report != nullptr) *report = loss.report;
    return tape.scalar_with_grad(stacked, loss.value, std::move(loss.dz));
}

// Positive sets for a batch: pair-label batches derive them from equal
// labels, protein-anchor batches carry them explicitly.
std::vector<std::vector<int>> batch_positive_sets(const ContrastBatch& batch);

}  // namespace scmppi
