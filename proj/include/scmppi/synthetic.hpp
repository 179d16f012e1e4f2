#pragma once

#include <cstdint>
#include <string>

#include "scmppi/io.hpp"

namespace scmppi {

// Planted-community dataset for desk-scale end-to-end runs: sequences carry
// community-biased composition and motifs, the interaction graph is a
// stochastic block model, positive pairs are intra-community and negatives
// inter-community. signal = 0 removes both the composition bias and the
// block structure, leaving nothing learnable.
struct SynthConfig {
    int communities = 2;
    int proteins_per_community = 50;
    int pair_count = 400;  // balanced positives/negatives when even
    int seq_len_min = 60;
    int seq_len_max = 100;
    double signal = 1.0;  // in [0, 1]
    std::uint64_t seed = 1;
    int embed_dim = 32;
    int k = 1;
    std::string name = "synth";
};

// Writes proteins.fasta, pairs.tsv, edges.tsv, and manifest.cfg under
// out_dir and returns the loaded manifest. Identical inputs produce
// byte-identical trees.
DatasetManifest generate_synthetic(const SynthConfig& cfg, const std::string& out_dir);

}  // namespace scmppi
