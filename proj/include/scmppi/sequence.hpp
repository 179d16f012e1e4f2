#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "scmppi/tensor.hpp"

namespace scmppi {

// Canonical 20-letter amino-acid alphabet, in the index order used by every
// composition vector and pair grid.
inline constexpr char kAminoAlphabet[21] = "ACDEFGHIKLMNPQRSTVWY";

// Index of a residue in the canonical alphabet, or -1.
int aa_index(char c);

enum class SanitizePolicy {
    Reject,        // any non-canonical residue is an error
    DropUnknown,   // non-canonical residues are removed before featurization
};

struct ProteinSequence {
    std::string id;
    std::string residues;  // validated, uppercase, canonical alphabet only

    std::size_t length() const { return residues.size(); }
};

// Validates and normalizes a raw sequence. Lowercase input is uppercased;
// the policy decides what happens to non-canonical letters (X, B, Z, U, O,
// and anything else outside the alphabet).
ProteinSequence make_protein_sequence(const std::string& id, const std::string& raw,
                                      SanitizePolicy policy = SanitizePolicy::Reject);

struct ResidueEmbeddingMatrix {
    std::string id;
    int rows = 0;  // L, one row per residue
    int dim = 0;   // D
    std::vector<float> values;  // rows x dim, row-major
};

using EmbeddingMap = std::map<std::string, ResidueEmbeddingMatrix>;

struct SeqFeatureBundle {
    std::vector<float> aac;   // 20
    std::vector<float> dpc;   // 400
    Tensor cksaap;            // [(k+1)*D, 20, 20]
    int k = 0;
};

// Residue frequencies; entries sum to 1.
std::vector<float> featurize_aac(const ProteinSequence& seq);

// Adjacent-pair frequencies over L-1 dipeptides, index 20*idx(a)+idx(b).
// Sequences shorter than 2 residues have no dipeptides and are an error.
std::vector<float> featurize_dpc(const ProteinSequence& seq);

// For each gap g in 0..k and residue-type pair (a,b), the mean over all
// occurrences i<j, j-i-1=g, s_i=a, s_j=b of (ae_i + ae_j)/2; zero vector for
// pairs that never occur. Channels-first layout [(k+1)*D, 20, 20] with
// channel g*D+d.
Tensor cksaap_embed(const ProteinSequence& seq, const ResidueEmbeddingMatrix& emb, int k);

SeqFeatureBundle featurize_bundle(const ProteinSequence& seq, const ResidueEmbeddingMatrix& emb,
                                  int k);

// Desk-scale stand-in for a pretrained residue embedder. Row i is a unit
// vector drawn deterministically from (residue letter, i mod 8, seed), so
// identical contexts share rows and reruns are bit-identical.
ResidueEmbeddingMatrix toy_residue_embedder(const ProteinSequence& seq, int dim,
                                            std::uint64_t seed);

// Reads a REMB container (format in io.hpp). Duplicate ids are an error.
EmbeddingMap load_residue_embeddings(const std::string& path);

}  // namespace scmppi
