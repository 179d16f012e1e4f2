#include "scmppi/training.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "scmppi/encoder.hpp"
#include "scmppi/errors.hpp"
#include "scmppi/log.hpp"
#include "scmppi/rng.hpp"

namespace scmppi {

double bce_loss(const std::vector<double>& predictions, const std::vector<int>& labels) {
    if (predictions.size() != labels.size()) {
        throw DataError("bce: " + std::to_string(predictions.size()) + " predictions vs " +
                        std::to_string(labels.size()) + " labels");
    }
    double loss = 0.0;
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        const double p = std::min(1.0 - 1e-7, std::max(1e-7, predictions[i]));
        loss -= labels[i] == 1 ? std::log(p) : std::log(1.0 - p);
    }
    return loss;
}

double total_loss(double bce, double psup, double kappa) {
    if (kappa < 0.0) throw DataError("total_loss: kappa must be nonnegative");
    return bce + kappa * psup;
}

namespace {

// Per-protein inputs, computed once per training/prediction run.
struct ProteinFeatures {
    Tensor aac{{20}, std::vector<float>(20, 0.0f)};
    Tensor dpc{{400}, std::vector<float>(400, 0.0f)};
    Tensor cksaap;
    Tensor node;
};

class FeatureCache {
public:
    FeatureCache(const PipelineConfig& cfg, const std::map<std::string, ProteinSequence>& sequences,
                 const EmbeddingMap& embeddings, const NodeEmbeddingTable* table)
        : cfg_(cfg), sequences_(sequences), embeddings_(embeddings), table_(table) {}

    const ProteinFeatures& get(const std::string& id) {
        auto it = cache_.find(id);
        if (it != cache_.end()) return it->second;

        auto seq_it = sequences_.find(id);
        if (seq_it == sequences_.end()) {
            throw DataError("training: no sequence for protein '" + id + "'");
        }
        ProteinFeatures f;
        if (cfg_.seq_on) {
            auto emb_it = embeddings_.find(id);
            if (emb_it == embeddings_.end()) {
                throw DataError("training: no residue embedding for protein '" + id + "'");
            }
            const SeqFeatureBundle bundle =
                featurize_bundle(seq_it->second, emb_it->second, cfg_.encoder.k);
            f.aac = Tensor({20}, bundle.aac);
            f.dpc = Tensor({400}, bundle.dpc);
            f.cksaap = bundle.cksaap;
        } else {
            f.cksaap = Tensor::zeros({cfg_.encoder.cksaap_channels(), 20, 20});
        }
        if (cfg_.graph_on && table_ != nullptr && table_->size() > 0) {
            f.node = Tensor({cfg_.encoder.graph_dim}, table_->lookup(id));
        } else {
            f.node = Tensor::zeros({cfg_.encoder.graph_dim});
        }
        return cache_.emplace(id, std::move(f)).first->second;
    }

private:
    const PipelineConfig& cfg_;
    const std::map<std::string, ProteinSequence>& sequences_;
    const EmbeddingMap& embeddings_;
    const NodeEmbeddingTable* table_;
    std::map<std::string, ProteinFeatures> cache_;
};

// Encodes the distinct proteins of a batch once and reuses the fused
// representation across pairs.
class BatchEncoder {
public:
    BatchEncoder(Tape& tape, const PipelineConfig& cfg, const ParamLeases<float>& leases,
                 FeatureCache& cache)
        : tape_(tape), cfg_(cfg), leases_(leases), cache_(cache) {}

    Tape::Value fused(const std::string& id) {
        auto it = fused_.find(id);
        if (it != fused_.end()) return it->second;
        const ProteinFeatures& f = cache_.get(id);
        auto cks = tape_.leaf(f.cksaap, false);
        auto aac = tape_.leaf(f.aac, false);
        auto dpc = tape_.leaf(f.dpc, false);
        auto seq = encode_sequence_node(tape_, cfg_.encoder, leases_, cks, aac, dpc);
        auto node = tape_.leaf(f.node, false);
        auto fused = fuse_node(tape_, cfg_.encoder, leases_, seq, node);
        fused_.emplace(id, fused);
        return fused;
    }

private:
    Tape& tape_;
    const PipelineConfig& cfg_;
    const ParamLeases<float>& leases_;
    FeatureCache& cache_;
    std::map<std::string, Tape::Value> fused_;
};

// Appends the summed BCE head over per-pair scalar predictions.
Tape::Value bce_node(Tape& tape, const std::vector<Tape::Value>& preds,
                     const std::vector<int>& labels) {
    auto stacked = tape.concat(preds);
    const auto& v = tape.val(stacked);
    double value = 0.0;
    std::vector<float> grad(v.data.size(), 0.0f);
    for (std::size_t i = 0; i < v.data.size(); ++i) {
        const double raw = static_cast<double>(v.data[i]);
        const double p = std::min(1.0 - 1e-7, std::max(1e-7, raw));
        value -= labels[i] == 1 ? std::log(p) : std::log(1.0 - p);
        if (raw > 1e-7 && raw < 1.0 - 1e-7) {
            grad[i] = static_cast<float>((p - labels[i]) / (p * (1.0 - p)));
        }
    }
    return tape.scalar_with_grad(stacked, value, std::move(grad));
}

std::vector<std::vector<float>> collect_grads(Tape& tape, const ParamStore& store,
                                              const ParamLeases<float>& leases) {
    std::vector<std::vector<float>> grads(store.count());
    for (std::size_t i = 0; i < store.count(); ++i) {
        const auto& g = tape.grad(leases.get(store.name(i)));
        grads[i] = g.empty() ? std::vector<float>(store.value(i).data.size(), 0.0f) : g;
    }
    return grads;
}

std::vector<double> score_pairs_impl(const PipelineConfig& cfg, const ParamStore& params,
                                     FeatureCache& cache,
                                     const std::vector<std::pair<std::string, std::string>>& pairs) {
    std::vector<double> scores;
    scores.reserve(pairs.size());
    constexpr std::size_t kChunk = 256;
    for (std::size_t begin = 0; begin < pairs.size(); begin += kChunk) {
        const std::size_t end = std::min(pairs.size(), begin + kChunk);
        Tape tape;
        auto leases = lease_params(tape, params, /*for_training=*/false);
        BatchEncoder enc(tape, cfg, leases, cache);
        for (std::size_t i = begin; i < end; ++i) {
            auto fi = enc.fused(pairs[i].first);
            auto fj = enc.fused(pairs[i].second);
            auto pred = classify_pair_node(tape, leases, fi, fj);
            scores.push_back(static_cast<double>(tape.val(pred).data[0]));
        }
    }
    return scores;
}

double validation_mcc(const PipelineConfig& cfg, const ParamStore& params, FeatureCache& cache,
                      const std::vector<PairSample>& val_pairs) {
    std::vector<std::pair<std::string, std::string>> ids;
    std::vector<int> labels;
    ids.reserve(val_pairs.size());
    for (const auto& p : val_pairs) {
        ids.emplace_back(p.id_a, p.id_b);
        labels.push_back(p.label);
    }
    const auto scores = score_pairs_impl(cfg, params, cache, ids);
    return basic_metrics(confusion(scores, labels, 0.5)).mcc;
}

// Stratified split of `pairs` into (train, validation).
void split_validation(const std::vector<PairSample>& pairs, double fraction, std::uint64_t seed,
                      std::vector<PairSample>& train_out, std::vector<PairSample>& val_out) {
    std::vector<std::size_t> by_class[2];
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        by_class[pairs[i].label == 1 ? 1 : 0].push_back(i);
    }
    std::vector<char> in_val(pairs.size(), 0);
    for (int c = 0; c < 2; ++c) {
        auto& idx = by_class[c];
        if (idx.empty()) continue;
        Rng rng(derive_seed(seed, 0xa11dULL, static_cast<std::uint64_t>(c)));
        rng.shuffle(idx);
        std::size_t take = static_cast<std::size_t>(
            std::llround(fraction * static_cast<double>(idx.size())));
        take = std::max<std::size_t>(1, take);
        if (idx.size() >= 2) take = std::min(take, idx.size() - 1);
        for (std::size_t i = 0; i < take && i < idx.size(); ++i) in_val[idx[i]] = 1;
    }
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        (in_val[i] ? val_out : train_out).push_back(pairs[i]);
    }
    if (val_out.empty() || train_out.empty()) {
        throw DataError("training: dataset too small to carve a validation split");
    }
}

}  // namespace

TrainResult train(const std::vector<PairSample>& pairs,
                  const std::map<std::string, ProteinSequence>& sequences,
                  const EmbeddingMap& embeddings, const PpiGraph& graph,
                  const PipelineConfig& cfg) {
    cfg.validate();
    if (pairs.empty()) throw DataError("training: empty pair list");
    for (const auto& p : pairs) {
        if (sequences.count(p.id_a) == 0 || sequences.count(p.id_b) == 0) {
            throw DataError("training: pair (" + p.id_a + ", " + p.id_b +
                            ") references a protein without a sequence");
        }
    }

    TrainResult out;

    // Frozen preprocessing: node embeddings from the (already
    // leakage-filtered) graph.
    if (cfg.graph_on) {
        out.node_table = node2vec_embeddings(graph, cfg.node2vec, cfg.seed);
    }

    std::vector<PairSample> train_pairs, val_pairs;
    split_validation(pairs, cfg.val_fraction, cfg.seed, train_pairs, val_pairs);
    out.val_pairs = val_pairs;

    FeatureCache cache(cfg, sequences, embeddings, cfg.graph_on ? &out.node_table : nullptr);

    ParamStore params;
    init_model_params(params, cfg.encoder, cfg.seed);
    const AdamWConfig adamw = cfg.adamw();
    const ContrastConfig contrast = cfg.contrast();
    const bool use_contrastive = cfg.cl_on && cfg.kappa > 0.0;

    std::vector<Tensor> best_values;
    double best_mcc = -2.0;
    int best_epoch = 0;
    int non_improving = 0;

    for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
        std::vector<std::size_t> order(train_pairs.size());
        std::iota(order.begin(), order.end(), std::size_t{0});
        Rng shuffle_rng(derive_seed(cfg.seed, 0x54f1ULL, static_cast<std::uint64_t>(epoch)));
        shuffle_rng.shuffle(order);

        double epoch_total = 0.0, epoch_bce = 0.0, epoch_psup = 0.0;
        std::int64_t epoch_filtered = 0;

        for (std::size_t begin = 0; begin < order.size();
             begin += static_cast<std::size_t>(cfg.batch_size)) {
            const std::size_t end =
                std::min(order.size(), begin + static_cast<std::size_t>(cfg.batch_size));
            const int batch_index = static_cast<int>(begin / cfg.batch_size);

            Tape tape;
            auto leases = lease_params(tape, params, /*for_training=*/true);
            BatchEncoder enc(tape, cfg, leases, cache);

            std::vector<Tape::Value> preds;
            std::vector<int> labels;
            std::vector<Tape::Value> fused_a, fused_b;
            for (std::size_t i = begin; i < end; ++i) {
                const PairSample& p = train_pairs[order[i]];
                auto fi = enc.fused(p.id_a);
                auto fj = enc.fused(p.id_b);
                preds.push_back(classify_pair_node(tape, leases, fi, fj));
                labels.push_back(p.label);
                fused_a.push_back(fi);
                fused_b.push_back(fj);
            }
            auto loss = bce_node(tape, preds, labels);
            const double bce_value = static_cast<double>(tape.val(loss).data[0]);
            double psup_value = 0.0;

            if (use_contrastive) {
                std::vector<Tape::Value> rows;
                std::vector<std::vector<int>> positives;
                if (cfg.contrastive_mode == ContrastMode::PairLabel) {
                    for (std::size_t i = 0; i < preds.size(); ++i) {
                        auto rep = tape.add(fused_a[i], fused_b[i]);
                        rows.push_back(project_node(tape, cfg.encoder, leases, rep));
                    }
                    positives = detail::positives_from_labels(labels);
                } else {
                    // Distinct proteins as anchors, in-batch binding partners
                    // as positives.
                    std::vector<std::string> anchor_ids;
                    std::map<std::string, int> row_of;
                    for (std::size_t i = begin; i < end; ++i) {
                        const PairSample& p = train_pairs[order[i]];
                        for (const std::string& id : {p.id_a, p.id_b}) {
                            if (row_of.emplace(id, static_cast<int>(anchor_ids.size())).second) {
                                anchor_ids.push_back(id);
                            }
                        }
                    }
                    positives.assign(anchor_ids.size(), {});
                    for (std::size_t i = begin; i < end; ++i) {
                        const PairSample& p = train_pairs[order[i]];
                        if (p.label != 1 || p.id_a == p.id_b) continue;
                        const int ra = row_of.at(p.id_a);
                        const int rb = row_of.at(p.id_b);
                        positives[static_cast<std::size_t>(ra)].push_back(rb);
                        positives[static_cast<std::size_t>(rb)].push_back(ra);
                    }
                    for (auto& pos : positives) {
                        std::sort(pos.begin(), pos.end());
                        pos.erase(std::unique(pos.begin(), pos.end()), pos.end());
                    }
                    for (const std::string& id : anchor_ids) {
                        rows.push_back(project_node(tape, cfg.encoder, leases, enc.fused(id)));
                    }
                }
                const bool any_positive =
                    std::any_of(positives.begin(), positives.end(),
                                [](const std::vector<int>& p) { return !p.empty(); });
                if (rows.size() >= 2 && any_positive) {
                    auto stacked = tape.stack_rows(rows);
                    FilterReport report;
                    auto psup = psup_loss_node(tape, stacked, positives, contrast, &report);
                    out.contrastive_invocations += 1;
                    epoch_filtered += report.discarded_negatives;
                    psup_value = static_cast<double>(tape.val(psup).data[0]);
                    loss = tape.add_scaled(loss, psup, cfg.kappa);
                }
            }

            const double batch_loss = static_cast<double>(tape.val(loss).data[0]);
            if (!std::isfinite(batch_loss)) {
                throw NumericError("training: non-finite loss at epoch " + std::to_string(epoch) +
                                   ", batch " + std::to_string(batch_index));
            }
            epoch_total += batch_loss;
            epoch_bce += bce_value;
            epoch_psup += psup_value;

            tape.backward(loss);
            params.adamw_step(collect_grads(tape, params, leases), adamw);
        }

        const double val_mcc = validation_mcc(cfg, params, cache, val_pairs);
        const double n = static_cast<double>(train_pairs.size());
        out.log.push_back(EpochRow{epoch, epoch_total / n, epoch_bce / n, epoch_psup / n,
                                   epoch_filtered, val_mcc});
        out.epochs_run = epoch;

        if (val_mcc > best_mcc) {
            best_mcc = val_mcc;
            best_epoch = epoch;
            non_improving = 0;
            best_values.clear();
            for (std::size_t i = 0; i < params.count(); ++i) {
                best_values.push_back(params.value(i));
            }
        } else {
            non_improving += 1;
            if (non_improving >= cfg.patience) break;
        }
    }

    // Hand back the best-MCC epoch, never the last one.
    for (std::size_t i = 0; i < params.count(); ++i) {
        out.model.params.add(params.name(i), best_values[i], params.trainable(i));
    }
    out.model.config = cfg;
    out.model.best_epoch = best_epoch;
    out.model.best_val_mcc = best_mcc;
    return out;
}

std::vector<double> predict_scores(const TrainedModel& model,
                                   const std::vector<std::pair<std::string, std::string>>& pairs,
                                   const std::map<std::string, ProteinSequence>& sequences,
                                   const EmbeddingMap& embeddings,
                                   const NodeEmbeddingTable& node_table) {
    for (const auto& [a, b] : pairs) {
        if (sequences.count(a) == 0 || sequences.count(b) == 0) {
            throw DataError("predict: pair (" + a + ", " + b +
                            ") references a protein without a sequence");
        }
    }
    FeatureCache cache(model.config, sequences, embeddings,
                       model.config.graph_on ? &node_table : nullptr);
    return score_pairs_impl(model.config, model.params, cache, pairs);
}

std::vector<std::pair<std::string, std::vector<float>>> export_projections(
    const TrainedModel& model, const std::map<std::string, ProteinSequence>& sequences,
    const EmbeddingMap& embeddings, const NodeEmbeddingTable& node_table) {
    FeatureCache cache(model.config, sequences, embeddings,
                       model.config.graph_on ? &node_table : nullptr);
    std::vector<std::pair<std::string, std::vector<float>>> out;
    Tape tape;
    auto leases = lease_params(tape, model.params, /*for_training=*/false);
    BatchEncoder enc(tape, model.config, leases, cache);
    for (const auto& [id, seq] : sequences) {
        auto z = project_node(tape, model.config.encoder, leases, enc.fused(id));
        out.emplace_back(id, tape.val(z).data);
    }
    return out;
}

std::vector<std::vector<std::size_t>> stratified_folds(const std::vector<PairSample>& pairs,
                                                       int folds, std::uint64_t seed) {
    if (folds < 2) throw DataError("crossval: need at least 2 folds");
    if (pairs.size() < static_cast<std::size_t>(folds)) {
        throw DataError("crossval: dataset smaller than the number of folds");
    }
    std::vector<std::size_t> by_class[2];
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        by_class[pairs[i].label == 1 ? 1 : 0].push_back(i);
    }
    for (int c = 0; c < 2; ++c) {
        if (by_class[c].size() < static_cast<std::size_t>(folds)) {
            throw DataError("crossval: stratification impossible, class " + std::to_string(c) +
                            " has fewer samples than folds");
        }
    }
    std::vector<std::vector<std::size_t>> assignment(static_cast<std::size_t>(folds));
    for (int c = 0; c < 2; ++c) {
        Rng rng(derive_seed(seed, 0xf01dULL, static_cast<std::uint64_t>(c)));
        rng.shuffle(by_class[c]);
        for (std::size_t i = 0; i < by_class[c].size(); ++i) {
            assignment[i % static_cast<std::size_t>(folds)].push_back(by_class[c][i]);
        }
    }
    for (auto& fold : assignment) std::sort(fold.begin(), fold.end());
    return assignment;
}

CrossvalOutcome crossval(const Dataset& ds, const PipelineConfig& cfg, int folds) {
    cfg.validate();
    const auto assignment = stratified_folds(ds.pairs, folds, cfg.seed);
    CrossvalOutcome out;
    const std::size_t n_metrics = metric_names().size();
    std::vector<std::vector<double>> columns(n_metrics);

    for (int f = 0; f < folds; ++f) {
        FoldOutcome fold;
        fold.fold = f;
        fold.test_indices = assignment[static_cast<std::size_t>(f)];

        std::vector<std::pair<std::string, std::string>> eval_pairs;
        std::vector<int> test_labels;
        for (std::size_t idx : fold.test_indices) {
            eval_pairs.emplace_back(ds.pairs[idx].id_a, ds.pairs[idx].id_b);
            test_labels.push_back(ds.pairs[idx].label);
        }
        auto removal = remove_leakage_edges(ds.graph, eval_pairs);
        fold.removed_edges = removal.removed_edges;
        fold.fold_graph = std::move(removal.graph);

        std::vector<PairSample> train_pool;
        std::set<std::size_t> test_set(fold.test_indices.begin(), fold.test_indices.end());
        for (std::size_t i = 0; i < ds.pairs.size(); ++i) {
            if (test_set.count(i) == 0) train_pool.push_back(ds.pairs[i]);
        }

        PipelineConfig fold_cfg = cfg;
        fold_cfg.seed = derive_seed(cfg.seed, 0xcf01ULL, static_cast<std::uint64_t>(f));
        fold.result = train(train_pool, ds.sequences, ds.embeddings, fold.fold_graph, fold_cfg);

        const auto scores = predict_scores(fold.result.model, eval_pairs, ds.sequences,
                                           ds.embeddings, fold.result.node_table);
        fold.metrics = full_metrics(scores, test_labels);
        const auto values = metric_values(fold.metrics);
        for (std::size_t m = 0; m < n_metrics; ++m) columns[m].push_back(values[m]);
        log::info("crossval fold " + std::to_string(f) + ": auc = " +
                  format_double(fold.metrics.auc) + ", mcc = " +
                  format_double(fold.metrics.basic.mcc) + ", removed " +
                  std::to_string(fold.removed_edges) + " leakage edge(s)");
        out.folds.push_back(std::move(fold));
    }

    out.mean.resize(n_metrics);
    out.stdev.resize(n_metrics);
    for (std::size_t m = 0; m < n_metrics; ++m) {
        const double mean =
            std::accumulate(columns[m].begin(), columns[m].end(), 0.0) / columns[m].size();
        double var = 0.0;
        for (double v : columns[m]) var += (v - mean) * (v - mean);
        out.mean[m] = mean;
        out.stdev[m] = columns[m].size() > 1
                           ? std::sqrt(var / static_cast<double>(columns[m].size() - 1))
                           : 0.0;
    }
    return out;
}

}  // namespace scmppi
