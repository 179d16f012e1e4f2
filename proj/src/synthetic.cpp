#include "scmppi/synthetic.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>

#include "scmppi/errors.hpp"
#include "scmppi/rng.hpp"
#include "scmppi/sequence.hpp"

namespace fs = std::filesystem;

namespace scmppi {

namespace {

std::string protein_id(int community, int index) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "C%dP%03d", community, index);
    return buf;
}

}  // namespace

DatasetManifest generate_synthetic(const SynthConfig& cfg, const std::string& out_dir) {
    if (cfg.communities < 2) throw DataError("synth: need at least 2 communities");
    if (cfg.proteins_per_community < 4) {
        throw DataError("synth: need at least 4 proteins per community");
    }
    if (cfg.pair_count < 2) throw DataError("synth: need at least 2 pairs");
    if (cfg.signal < 0.0 || cfg.signal > 1.0) throw DataError("synth: signal must be in [0, 1]");
    if (cfg.seq_len_min < 10 || cfg.seq_len_max < cfg.seq_len_min) {
        throw DataError("synth: bad sequence length range");
    }
    fs::create_directories(out_dir);

    const int n_comm = cfg.communities;
    const int per_comm = cfg.proteins_per_community;
    const int n_prot = n_comm * per_comm;

    // Community residue profiles: a preferred subset of the alphabet plus a
    // short motif over it. signal scales how often they are used.
    std::vector<std::string> preferred(static_cast<std::size_t>(n_comm));
    std::vector<std::string> motif(static_cast<std::size_t>(n_comm));
    for (int c = 0; c < n_comm; ++c) {
        std::vector<char> letters(kAminoAlphabet, kAminoAlphabet + 20);
        Rng rng(derive_seed(cfg.seed, 0x9f0fULL, static_cast<std::uint64_t>(c)));
        rng.shuffle(letters);
        preferred[static_cast<std::size_t>(c)].assign(letters.begin(), letters.begin() + 6);
        for (int i = 0; i < 5; ++i) {
            motif[static_cast<std::size_t>(c)].push_back(
                preferred[static_cast<std::size_t>(c)][rng.below(6)]);
        }
    }

    std::vector<ProteinSequence> proteins;
    proteins.reserve(static_cast<std::size_t>(n_prot));
    for (int c = 0; c < n_comm; ++c) {
        for (int i = 0; i < per_comm; ++i) {
            Rng rng(derive_seed(cfg.seed, 0x5e9ULL, static_cast<std::uint64_t>(c),
                                static_cast<std::uint64_t>(i)));
            const int len = cfg.seq_len_min +
                            static_cast<int>(rng.below(
                                static_cast<std::uint64_t>(cfg.seq_len_max - cfg.seq_len_min + 1)));
            std::string s;
            s.reserve(static_cast<std::size_t>(len));
            while (static_cast<int>(s.size()) < len) {
                if (cfg.signal > 0.0 && s.size() % 17 == 9 && rng.uniform() < cfg.signal) {
                    s += motif[static_cast<std::size_t>(c)];
                    continue;
                }
                if (rng.uniform() < 0.7 * cfg.signal) {
                    s.push_back(preferred[static_cast<std::size_t>(c)][rng.below(6)]);
                } else {
                    s.push_back(kAminoAlphabet[rng.below(20)]);
                }
            }
            s.resize(static_cast<std::size_t>(len));
            proteins.push_back(ProteinSequence{protein_id(c, i), std::move(s)});
        }
    }

    // Stochastic block model over the same communities.
    const double p_in = 0.04 + 0.30 * cfg.signal;
    const double p_out = 0.04;
    Rng edge_rng(derive_seed(cfg.seed, 0xed6eULL));
    std::vector<std::pair<int, int>> edges;
    for (int u = 0; u < n_prot; ++u) {
        for (int v = u + 1; v < n_prot; ++v) {
            const bool same = (u / per_comm) == (v / per_comm);
            if (edge_rng.uniform() < (same ? p_in : p_out)) edges.emplace_back(u, v);
        }
    }

    // Balanced labeled pairs: positives intra-community, negatives across.
    const int n_pos = cfg.pair_count / 2;
    const int n_neg = cfg.pair_count - n_pos;
    const std::int64_t intra_capacity =
        static_cast<std::int64_t>(n_comm) * per_comm * (per_comm - 1) / 2;
    const std::int64_t inter_capacity = static_cast<std::int64_t>(n_prot) * (n_prot - 1) / 2 -
                                        intra_capacity;
    if (n_pos > intra_capacity || n_neg > inter_capacity) {
        throw DataError("synth: pair_count exceeds the number of distinct pairs available");
    }
    std::set<std::pair<int, int>> used;
    std::vector<std::tuple<int, int, int>> pairs;  // (u, v, label)
    Rng pair_rng(derive_seed(cfg.seed, 0x9a12ULL));
    auto sample_pair = [&](bool same_community) {
        while (true) {
            const int c1 = static_cast<int>(pair_rng.below(static_cast<std::uint64_t>(n_comm)));
            int c2 = c1;
            if (!same_community) {
                while (c2 == c1) {
                    c2 = static_cast<int>(pair_rng.below(static_cast<std::uint64_t>(n_comm)));
                }
            }
            const int u = c1 * per_comm +
                          static_cast<int>(pair_rng.below(static_cast<std::uint64_t>(per_comm)));
            int v = c2 * per_comm +
                    static_cast<int>(pair_rng.below(static_cast<std::uint64_t>(per_comm)));
            if (u == v) continue;
            const auto key = std::minmax(u, v);
            if (used.insert({key.first, key.second}).second) {
                return std::pair<int, int>{u, v};
            }
        }
    };
    for (int i = 0; i < n_pos; ++i) {
        const auto [u, v] = sample_pair(true);
        pairs.emplace_back(u, v, 1);
    }
    for (int i = 0; i < n_neg; ++i) {
        const auto [u, v] = sample_pair(false);
        pairs.emplace_back(u, v, 0);
    }
    Rng order_rng(derive_seed(cfg.seed, 0x0deaULL));
    order_rng.shuffle(pairs);

    const fs::path dir(out_dir);
    const std::string fasta_path = (dir / "proteins.fasta").string();
    const std::string pairs_path = (dir / "pairs.tsv").string();
    const std::string edges_path = (dir / "edges.tsv").string();
    const std::string manifest_path = (dir / "manifest.cfg").string();

    write_fasta(fasta_path, proteins);
    {
        std::ofstream out(pairs_path, std::ios::binary);
        for (const auto& [u, v, label] : pairs) {
            out << proteins[static_cast<std::size_t>(u)].id << '\t'
                << proteins[static_cast<std::size_t>(v)].id << '\t' << label << '\n';
        }
    }
    {
        std::ofstream out(edges_path, std::ios::binary);
        for (const auto& [u, v] : edges) {
            out << proteins[static_cast<std::size_t>(u)].id << '\t'
                << proteins[static_cast<std::size_t>(v)].id << '\n';
        }
    }
    DatasetManifest m;
    m.name = cfg.name;
    m.fasta_path = fasta_path;
    m.pairs_path = pairs_path;
    m.edges_path = edges_path;
    m.k = cfg.k;
    m.embed_dim = cfg.embed_dim;
    m.embedder_seed = cfg.seed;
    write_manifest(manifest_path, m);
    return m;
}

}  // namespace scmppi
