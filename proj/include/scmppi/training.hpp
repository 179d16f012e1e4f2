#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "scmppi/config.hpp"
#include "scmppi/contrastive.hpp"
#include "scmppi/io.hpp"
#include "scmppi/metrics.hpp"

namespace scmppi {

// Summed binary cross-entropy with predictions clamped to [1e-7, 1-1e-7].
double bce_loss(const std::vector<double>& predictions, const std::vector<int>& labels);

// L = L_BCE + kappa * L_PSup.
double total_loss(double bce, double psup, double kappa);

struct EpochRow {
    int epoch = 0;         // 1-based
    double train_loss = 0.0;  // per-pair mean of the total loss
    double bce = 0.0;
    double psup = 0.0;
    std::int64_t filtered_negatives = 0;
    double val_mcc = 0.0;
};

struct TrainResult {
    TrainedModel model;
    NodeEmbeddingTable node_table;  // empty when the graph branch is off
    std::vector<EpochRow> log;
    std::vector<PairSample> val_pairs;  // the held-out early-stopping split
    std::int64_t contrastive_invocations = 0;
    int epochs_run = 0;
};

// Full training run: featurization, node2vec over the given graph (which the
// caller must already have leakage-filtered if evaluation pairs exist),
// minibatch AdamW epochs with the mixed loss, per-epoch validation MCC, and
// early stopping that keeps the best-MCC parameters.
TrainResult train(const std::vector<PairSample>& pairs,
                  const std::map<std::string, ProteinSequence>& sequences,
                  const EmbeddingMap& embeddings, const PpiGraph& graph,
                  const PipelineConfig& cfg);

// Deterministic scores in (0,1) for arbitrary id pairs; unknown graph ids
// fall back to the zero vector (sequence-only path), unknown sequences are an
// error.
std::vector<double> predict_scores(const TrainedModel& model,
                                   const std::vector<std::pair<std::string, std::string>>& pairs,
                                   const std::map<std::string, ProteinSequence>& sequences,
                                   const EmbeddingMap& embeddings,
                                   const NodeEmbeddingTable& node_table);

// Unit-norm projection of every protein (sorted by id), for external 2-D
// plotting.
std::vector<std::pair<std::string, std::vector<float>>> export_projections(
    const TrainedModel& model, const std::map<std::string, ProteinSequence>& sequences,
    const EmbeddingMap& embeddings, const NodeEmbeddingTable& node_table);

// Label-stratified fold assignment with a seeded shuffle. Every fold gets at
// least one sample of each class or the split is rejected.
std::vector<std::vector<std::size_t>> stratified_folds(const std::vector<PairSample>& pairs,
                                                       int folds, std::uint64_t seed);

struct FoldOutcome {
    int fold = 0;
    std::vector<std::size_t> test_indices;
    std::int64_t removed_edges = 0;
    PpiGraph fold_graph;  // training graph after leakage removal
    MetricReport metrics;
    TrainResult result;
};

struct CrossvalOutcome {
    std::vector<FoldOutcome> folds;
    std::vector<double> mean;   // metric_names() order
    std::vector<double> stdev;  // sample standard deviation over folds
};

// Per fold: remove the fold's test-pair edges from the graph, train on the
// remaining folds (train() holds out its own validation split), evaluate all
// eight metrics on the test fold.
CrossvalOutcome crossval(const Dataset& ds, const PipelineConfig& cfg, int folds = 5);

}  // namespace scmppi
