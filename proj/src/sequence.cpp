#include "scmppi/sequence.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>

#include "scmppi/errors.hpp"
#include "scmppi/rng.hpp"

namespace scmppi {

namespace {

std::array<int, 256> build_index_table() {
    std::array<int, 256> table;
    table.fill(-1);
    for (int i = 0; i < 20; ++i) {
        table[static_cast<unsigned char>(kAminoAlphabet[i])] = i;
    }
    return table;
}

const std::array<int, 256>& index_table() {
    static const std::array<int, 256> table = build_index_table();
    return table;
}

}  // namespace

int aa_index(char c) { return index_table()[static_cast<unsigned char>(c)]; }

ProteinSequence make_protein_sequence(const std::string& id, const std::string& raw,
                                      SanitizePolicy policy) {
    if (id.empty()) throw DataError("protein sequence: empty id");
    std::string residues;
    residues.reserve(raw.size());
    for (std::size_t i = 0; i < raw.size(); ++i) {
        const char c = static_cast<char>(std::toupper(static_cast<unsigned char>(raw[i])));
        if (aa_index(c) >= 0) {
            residues.push_back(c);
        } else if (policy == SanitizePolicy::Reject) {
            throw DataError("protein " + id + ": invalid residue '" + std::string(1, raw[i]) +
                            "' at position " + std::to_string(i + 1) +
                            " (use the sanitize option to drop non-canonical residues)");
        }
        // DropUnknown: skip silently
    }
    if (residues.empty()) {
        throw DataError("protein " + id + ": no canonical residues left after sanitization");
    }
    return ProteinSequence{id, std::move(residues)};
}

std::vector<float> featurize_aac(const ProteinSequence& seq) {
    if (seq.length() == 0) throw DataError("aac: empty sequence " + seq.id);
    std::array<std::int64_t, 20> counts{};
    for (char c : seq.residues) counts[static_cast<std::size_t>(aa_index(c))] += 1;
    std::vector<float> out(20);
    const double denom = static_cast<double>(seq.length());
    for (int i = 0; i < 20; ++i) out[i] = static_cast<float>(counts[i] / denom);
    return out;
}

std::vector<float> featurize_dpc(const ProteinSequence& seq) {
    if (seq.length() < 2) {
        throw DataError("dpc: sequence " + seq.id + " has fewer than 2 residues");
    }
    std::vector<std::int64_t> counts(400, 0);
    for (std::size_t i = 0; i + 1 < seq.length(); ++i) {
        const int a = aa_index(seq.residues[i]);
        const int b = aa_index(seq.residues[i + 1]);
        counts[static_cast<std::size_t>(20 * a + b)] += 1;
    }
    std::vector<float> out(400);
    const double denom = static_cast<double>(seq.length() - 1);
    for (int i = 0; i < 400; ++i) out[i] = static_cast<float>(counts[i] / denom);
    return out;
}

Tensor cksaap_embed(const ProteinSequence& seq, const ResidueEmbeddingMatrix& emb, int k) {
    if (k < 0) throw DataError("cksaap: gap bound must be nonnegative");
    const int L = static_cast<int>(seq.length());
    if (emb.rows != L) {
        throw DataError("cksaap: embedding rows " + std::to_string(emb.rows) +
                        " do not match sequence length " + std::to_string(L) + " for " + seq.id);
    }
    const int D = emb.dim;
    Tensor out = Tensor::zeros({(k + 1) * D, 20, 20});
    std::vector<double> acc(static_cast<std::size_t>(D));
    for (int g = 0; g <= k; ++g) {
        // Group pair positions per cell first, then average in 64-bit.
        std::vector<std::vector<int>> cell_pairs(400);
        for (int i = 0; i + g + 1 < L; ++i) {
            const int a = aa_index(seq.residues[static_cast<std::size_t>(i)]);
            const int b = aa_index(seq.residues[static_cast<std::size_t>(i + g + 1)]);
            cell_pairs[static_cast<std::size_t>(20 * a + b)].push_back(i);
        }
        for (int cell = 0; cell < 400; ++cell) {
            const auto& starts = cell_pairs[static_cast<std::size_t>(cell)];
            if (starts.empty()) continue;
            std::fill(acc.begin(), acc.end(), 0.0);
            for (int i : starts) {
                const float* ri = emb.values.data() + static_cast<std::size_t>(i) * D;
                const float* rj = emb.values.data() + static_cast<std::size_t>(i + g + 1) * D;
                for (int d = 0; d < D; ++d) {
                    acc[static_cast<std::size_t>(d)] +=
                        0.5 * (static_cast<double>(ri[d]) + static_cast<double>(rj[d]));
                }
            }
            const double inv = 1.0 / static_cast<double>(starts.size());
            for (int d = 0; d < D; ++d) {
                out.data[(static_cast<std::size_t>(g * D + d) * 400) + cell] =
                    static_cast<float>(acc[static_cast<std::size_t>(d)] * inv);
            }
        }
    }
    return out;
}

SeqFeatureBundle featurize_bundle(const ProteinSequence& seq, const ResidueEmbeddingMatrix& emb,
                                  int k) {
    SeqFeatureBundle b;
    b.aac = featurize_aac(seq);
    b.dpc = featurize_dpc(seq);
    b.cksaap = cksaap_embed(seq, emb, k);
    b.k = k;
    return b;
}

ResidueEmbeddingMatrix toy_residue_embedder(const ProteinSequence& seq, int dim,
                                            std::uint64_t seed) {
    if (dim < 1) throw DataError("toy embedder: dimension must be positive");
    ResidueEmbeddingMatrix m;
    m.id = seq.id;
    m.rows = static_cast<int>(seq.length());
    m.dim = dim;
    m.values.resize(static_cast<std::size_t>(m.rows) * dim);
    for (int i = 0; i < m.rows; ++i) {
        const auto letter = static_cast<std::uint64_t>(seq.residues[static_cast<std::size_t>(i)]);
        Rng rng(derive_seed(seed, letter, static_cast<std::uint64_t>(i % 8)));
        double norm_sq = 0.0;
        std::vector<double> row(static_cast<std::size_t>(dim));
        for (int d = 0; d < dim; ++d) {
            row[static_cast<std::size_t>(d)] = rng.gaussian();
            norm_sq += row[static_cast<std::size_t>(d)] * row[static_cast<std::size_t>(d)];
        }
        const double inv = norm_sq > 0.0 ? 1.0 / std::sqrt(norm_sq) : 1.0;
        for (int d = 0; d < dim; ++d) {
            m.values[static_cast<std::size_t>(i) * dim + d] =
                static_cast<float>(row[static_cast<std::size_t>(d)] * inv);
        }
    }
    return m;
}

}  // namespace scmppi
