#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "scmppi/config.hpp"
#include "scmppi/graph.hpp"
#include "scmppi/sequence.hpp"

namespace scmppi {

struct PairSample {
    std::string id_a;
    std::string id_b;
    int label = 0;  // 1 = interacting
};

// ---- FASTA -----------------------------------------------------------------

std::vector<ProteinSequence> parse_fasta(const std::string& path,
                                         SanitizePolicy policy = SanitizePolicy::Reject);

// Normalized output: `>id` header, sequence wrapped at 60 columns.
void write_fasta(const std::string& path, const std::vector<ProteinSequence>& seqs);

// ---- pairs and edges ---------------------------------------------------------

struct PairFile {
    std::vector<PairSample> pairs;
    std::int64_t duplicate_count = 0;  // repeated unordered id pairs, warned
};

// Tab-separated `id_a<TAB>id_b<TAB>label` with `#` comments.
PairFile parse_pairs(const std::string& path);

// Unlabeled (or labeled, label ignored) pair list for prediction.
std::vector<std::pair<std::string, std::string>> parse_pair_list(const std::string& path);

struct EdgeFile {
    PpiGraph graph;
    std::int64_t dropped_self_loops = 0;
    std::int64_t duplicate_edges = 0;  // last weight wins
};

// Tab-separated `id_a<TAB>id_b[<TAB>weight]`, weight defaults to 1.0.
EdgeFile parse_edges(const std::string& path);

// ---- REMB residue-embedding container ---------------------------------------
//
// Bit-exact little-endian layout:
//   magic "REMB", version u16 = 1, D u32, record count u64, then per record
//   id length u16, id bytes (UTF-8), L u32, L*D float32 row-major.

void write_remb(const std::string& path, const EmbeddingMap& embeddings);
EmbeddingMap read_remb(const std::string& path);

// ---- checkpoints -------------------------------------------------------------
//
// Versioned container: a text header (format version, config hash, canonical
// config serialization, parameter names and shapes) followed by the
// concatenated float32 little-endian parameter blobs in header order.

void save_checkpoint(const std::string& path, const TrainedModel& model);
TrainedModel load_checkpoint(const std::string& path);

// ---- node-embedding TSV -------------------------------------------------------

void write_embedding_tsv(const std::string& path, const NodeEmbeddingTable& table);
NodeEmbeddingTable read_embedding_tsv(const std::string& path);

// ---- dataset manifest ---------------------------------------------------------

struct DatasetManifest {
    std::string name = "dataset";
    std::string fasta_path;
    std::string pairs_path;
    std::string edges_path;
    std::string remb_path;  // optional; toy embedder is used when empty
    int k = 3;
    int embed_dim = 0;
    std::uint64_t embedder_seed = 1;
};

DatasetManifest load_manifest(const std::string& path);
void write_manifest(const std::string& path, const DatasetManifest& m);

// Fully loaded dataset: sequences, labeled pairs, interaction graph, and
// residue embeddings (REMB when declared, deterministic toy embedder
// otherwise). Verifies that every pair id has a sequence and that the
// embedding width matches the manifest.
struct Dataset {
    DatasetManifest manifest;
    std::map<std::string, ProteinSequence> sequences;
    std::vector<PairSample> pairs;
    PpiGraph graph;
    EmbeddingMap embeddings;
};

Dataset load_dataset(const DatasetManifest& manifest, const PipelineConfig& cfg);

}  // namespace scmppi
