#include "scmppi/contrastive.hpp"

#include <cmath>

namespace scmppi {

double cosine_score(const std::vector<float>& a, const std::vector<float>& b, double eps) {
    if (a.size() != b.size()) throw DataError("cosine_score: dimension mismatch");
    const double dot = kernels::dot(a.data(), b.data(), a.size());
    const double na = std::sqrt(kernels::dot(a.data(), a.data(), a.size()));
    const double nb = std::sqrt(kernels::dot(b.data(), b.data(), b.size()));
    return dot / (na * nb + eps);
}

namespace detail {

std::vector<std::vector<int>> positives_from_labels(const std::vector<int>& labels) {
    const int m = static_cast<int>(labels.size());
    std::vector<std::vector<int>> pos(static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i) {
        for (int a = 0; a < m; ++a) {
            if (a != i && labels[static_cast<std::size_t>(a)] == labels[static_cast<std::size_t>(i)]) {
                pos[static_cast<std::size_t>(i)].push_back(a);
            }
        }
    }
    return pos;
}

}  // namespace detail

namespace {

void check_batch(const Tensor& z) {
    if (z.shape.size() != 2) throw DataError("contrastive: batch must be [M, d]");
    const int m = z.shape[0], d = z.shape[1];
    for (int i = 0; i < m; ++i) {
        const double n = std::sqrt(kernels::dot(z.data.data() + static_cast<std::size_t>(i) * d,
                                                z.data.data() + static_cast<std::size_t>(i) * d,
                                                static_cast<std::size_t>(d)));
        if (std::abs(n - 1.0) > 1e-4) {
            throw DataError("contrastive: row " + std::to_string(i) +
                            " is not unit norm (|z| = " + std::to_string(n) + ")");
        }
    }
}

}  // namespace

std::vector<std::vector<int>> batch_positive_sets(const ContrastBatch& batch) {
    const int m = batch.z.shape.empty() ? 0 : batch.z.shape[0];
    if (batch.mode == ContrastMode::ProteinAnchor) {
        if (static_cast<int>(batch.positives.size()) != m) {
            throw DataError("contrastive: positive-set map size does not match batch");
        }
        for (int i = 0; i < m; ++i) {
            for (int p : batch.positives[static_cast<std::size_t>(i)]) {
                if (p == i) throw DataError("contrastive: anchor listed in its own positive set");
            }
        }
        return batch.positives;
    }
    if (static_cast<int>(batch.labels.size()) != m) {
        throw DataError("contrastive: label count does not match batch");
    }
    for (int y : batch.labels) {
        if (y != 0 && y != 1) throw DataError("contrastive: pair-label batch needs labels in {0,1}");
    }
    return detail::positives_from_labels(batch.labels);
}

ContrastLoss<float> simclr_loss(const Tensor& z, const std::vector<int>& pairing,
                                double temperature) {
    check_batch(z);
    const int m = z.shape[0];
    if (m < 2) throw DataError("simclr: batch needs at least two rows");
    if (static_cast<int>(pairing.size()) != m) throw DataError("simclr: pairing size mismatch");
    std::vector<std::vector<int>> positives(static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i) {
        const int j = pairing[static_cast<std::size_t>(i)];
        if (j == i || j < 0 || j >= m) throw DataError("simclr: invalid pairing j(i)");
        positives[static_cast<std::size_t>(i)] = {j};
    }
    return detail::contrastive_core<float>(z.data.data(), m, z.shape[1], positives, temperature,
                                           false, 0.0, 0.0);
}

ContrastLoss<float> supcon_loss(const ContrastBatch& batch, double temperature) {
    check_batch(batch.z);
    const auto positives = batch_positive_sets(batch);
    return detail::contrastive_core<float>(batch.z.data.data(), batch.z.shape[0], batch.z.shape[1],
                                           positives, temperature, false, 0.0, 0.0);
}

ContrastLoss<float> psup_loss(const ContrastBatch& batch, double temperature, double neg_threshold,
                              double eps) {
    check_batch(batch.z);
    if (neg_threshold < -1.0 || neg_threshold > 1.0) {
        throw DataError("psup: neg_threshold must lie in [-1, 1]");
    }
    const auto positives = batch_positive_sets(batch);
    return detail::contrastive_core<float>(batch.z.data.data(), batch.z.shape[0], batch.z.shape[1],
                                           positives, temperature, true, neg_threshold, eps);
}

}  // namespace scmppi
