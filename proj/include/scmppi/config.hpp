#pragma once

#include <cstdint>
#include <string>

#include "scmppi/contrastive.hpp"
#include "scmppi/encoder.hpp"
#include "scmppi/graph.hpp"
#include "scmppi/tensor.hpp"

namespace scmppi {

// Every tunable of the pipeline, mirrored 1:1 by the key=value config file.
// Defaults follow the published training recipe where one exists (AdamW at
// lr 0.001, batch 32, 30 epochs, patience 5, temperature 0.1, negative
// filter threshold 0.7, kappa 1.0, k = 3).
struct PipelineConfig {
    std::uint64_t seed = 42;

    // loss mixing and contrastive settings
    double kappa = 1.0;
    double temperature = 0.1;
    double neg_threshold = 0.7;
    ContrastMode contrastive_mode = ContrastMode::PairLabel;

    // optimizer and loop
    double lr = 0.001;
    int batch_size = 32;
    int max_epochs = 30;
    int patience = 5;
    double val_fraction = 0.1;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_eps = 1e-8;
    double weight_decay = 0.01;

    // ablation switches
    bool seq_on = true;
    bool graph_on = true;
    bool cl_on = true;

    // input handling
    bool sanitize = false;  // drop non-canonical residues instead of rejecting

    EncoderConfig encoder;
    Node2VecConfig node2vec;  // node2vec.dim is slaved to encoder.graph_dim

    AdamWConfig adamw() const {
        return AdamWConfig{lr, adam_beta1, adam_beta2, adam_eps, weight_decay};
    }

    ContrastConfig contrast() const { return ContrastConfig{temperature, neg_threshold, 1e-8}; }

    void validate() const;
};

// Canonical serialization: fixed key order, shortest round-trip number
// formatting. This text is what the checkpoint hash covers.
std::string serialize_config(const PipelineConfig& cfg);
PipelineConfig parse_config_text(const std::string& text, const std::string& origin);
PipelineConfig load_config_file(const std::string& path);
std::uint64_t config_hash(const PipelineConfig& cfg);

// Shortest round-trip decimal form of a double (to_chars).
std::string format_double(double v);

// All learned parameters plus the configuration that produced them.
struct TrainedModel {
    ParamStore params;
    PipelineConfig config;
    int best_epoch = 0;
    double best_val_mcc = 0.0;
};

}  // namespace scmppi
