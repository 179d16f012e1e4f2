#include "scmppi/graph.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <tuple>

#include "scmppi/errors.hpp"
#include "scmppi/kernels.hpp"
#include "scmppi/log.hpp"
#include "scmppi/rng.hpp"

namespace scmppi {

PpiGraph PpiGraph::build(const std::vector<std::tuple<std::string, std::string, float>>& edges) {
    std::set<std::string> ids;
    for (const auto& [a, b, w] : edges) {
        ids.insert(a);
        ids.insert(b);
        (void)w;
    }
    return build_with_nodes(std::vector<std::string>(ids.begin(), ids.end()), edges);
}

PpiGraph PpiGraph::build_with_nodes(
    const std::vector<std::string>& node_ids,
    const std::vector<std::tuple<std::string, std::string, float>>& edges) {
    PpiGraph g;
    std::set<std::string> ids(node_ids.begin(), node_ids.end());
    for (const auto& [a, b, w] : edges) {
        if (a == b) throw DataError("graph: self-loop on " + a);
        if (!(w > 0.0f)) throw DataError("graph: nonpositive weight on edge " + a + " -- " + b);
        ids.insert(a);
        ids.insert(b);
    }
    g.ids_.assign(ids.begin(), ids.end());
    for (std::size_t i = 0; i < g.ids_.size(); ++i) g.index_[g.ids_[i]] = static_cast<int>(i);
    g.adjacency_.resize(g.ids_.size());
    for (const auto& [a, b, w] : edges) {
        const int ia = g.index_.at(a);
        const int ib = g.index_.at(b);
        g.adjacency_[static_cast<std::size_t>(ia)].push_back({ib, w});
        g.adjacency_[static_cast<std::size_t>(ib)].push_back({ia, w});
    }
    for (auto& adj : g.adjacency_) {
        std::sort(adj.begin(), adj.end(),
                  [](const Neighbor& x, const Neighbor& y) { return x.node < y.node; });
        for (std::size_t i = 1; i < adj.size(); ++i) {
            if (adj[i].node == adj[i - 1].node) {
                throw DataError("graph: duplicate edge involving " +
                                g.ids_[static_cast<std::size_t>(adj[i].node)]);
            }
        }
    }
    g.edge_count_ = static_cast<std::int64_t>(edges.size());
    return g;
}

int PpiGraph::index_of(const std::string& id) const {
    auto it = index_.find(id);
    return it == index_.end() ? -1 : it->second;
}

bool PpiGraph::has_edge(int a, int b) const {
    if (a < 0 || b < 0 || a >= node_count() || b >= node_count()) return false;
    const auto& adj = adjacency_[static_cast<std::size_t>(a)];
    auto it = std::lower_bound(adj.begin(), adj.end(), b,
                               [](const Neighbor& n, int key) { return n.node < key; });
    return it != adj.end() && it->node == b;
}

bool PpiGraph::has_edge(const std::string& a, const std::string& b) const {
    return has_edge(index_of(a), index_of(b));
}

LeakageRemoval remove_leakage_edges(
    const PpiGraph& graph, const std::vector<std::pair<std::string, std::string>>& eval_pairs) {
    std::set<std::pair<int, int>> forbidden;
    for (const auto& [a, b] : eval_pairs) {
        const int ia = graph.index_of(a);
        const int ib = graph.index_of(b);
        if (ia < 0 || ib < 0) continue;
        forbidden.insert({std::min(ia, ib), std::max(ia, ib)});
    }
    std::vector<std::tuple<std::string, std::string, float>> kept;
    std::int64_t removed = 0;
    for (int u = 0; u < graph.node_count(); ++u) {
        for (const auto& nb : graph.neighbors(u)) {
            if (nb.node < u) continue;  // visit each undirected edge once
            if (forbidden.count({u, nb.node}) > 0) {
                removed += 1;
                continue;
            }
            kept.emplace_back(graph.id_of(u), graph.id_of(nb.node), nb.weight);
        }
    }
    std::vector<std::string> all_ids;
    all_ids.reserve(static_cast<std::size_t>(graph.node_count()));
    for (int u = 0; u < graph.node_count(); ++u) all_ids.push_back(graph.id_of(u));
    return LeakageRemoval{PpiGraph::build_with_nodes(all_ids, kept), removed};
}

std::vector<double> transition_distribution(const PpiGraph& graph, int prev, int curr, double p,
                                            double q) {
    if (!(p > 0.0) || !(q > 0.0)) throw DataError("node2vec: p and q must be positive");
    const auto& adj = graph.neighbors(curr);
    std::vector<double> probs(adj.size(), 0.0);
    if (adj.empty()) return probs;
    double total = 0.0;
    for (std::size_t i = 0; i < adj.size(); ++i) {
        double alpha = 1.0;
        if (prev != kWalkStart) {
            if (adj[i].node == prev) {
                alpha = 1.0 / p;
            } else if (graph.has_edge(prev, adj[i].node)) {
                alpha = 1.0;
            } else {
                alpha = 1.0 / q;
            }
        }
        probs[i] = alpha * static_cast<double>(adj[i].weight);
        total += probs[i];
    }
    for (double& x : probs) x /= total;
    return probs;
}

namespace {

// Inverse-CDF draw over an explicit probability vector.
int sample_index(const std::vector<double>& probs, Rng& rng) {
    const double u = rng.uniform();
    double cum = 0.0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        cum += probs[i];
        if (u < cum) return static_cast<int>(i);
    }
    return static_cast<int>(probs.size()) - 1;
}

}  // namespace

WalkCorpus generate_walks(const PpiGraph& graph, int walks_per_node, int walk_length, double p,
                          double q, std::uint64_t seed) {
    if (walks_per_node < 1 || walk_length < 1) {
        throw DataError("node2vec: walks_per_node and walk_length must be at least 1");
    }
    WalkCorpus corpus;
    corpus.walks.reserve(static_cast<std::size_t>(walks_per_node) * graph.node_count());
    for (int rep = 0; rep < walks_per_node; ++rep) {
        std::vector<int> order(static_cast<std::size_t>(graph.node_count()));
        for (int i = 0; i < graph.node_count(); ++i) order[static_cast<std::size_t>(i)] = i;
        Rng shuffle_rng(derive_seed(seed, 0x5175ULL, static_cast<std::uint64_t>(rep)));
        shuffle_rng.shuffle(order);
        for (int start : order) {
            Rng rng(derive_seed(seed, static_cast<std::uint64_t>(rep),
                                static_cast<std::uint64_t>(start) + 1));
            std::vector<int> walk{start};
            int prev = kWalkStart;
            while (static_cast<int>(walk.size()) < walk_length) {
                const int curr = walk.back();
                const auto probs = transition_distribution(graph, prev, curr, p, q);
                if (probs.empty()) break;
                const int pick = sample_index(probs, rng);
                prev = curr;
                walk.push_back(graph.neighbors(curr)[static_cast<std::size_t>(pick)].node);
            }
            corpus.walks.push_back(std::move(walk));
        }
    }
    return corpus;
}

NodeEmbeddingTable::NodeEmbeddingTable(int dim, std::vector<std::string> ids,
                                       std::vector<float> vectors)
    : dim_(dim), ids_(std::move(ids)), vectors_(std::move(vectors)) {
    if (vectors_.size() != ids_.size() * static_cast<std::size_t>(dim_)) {
        throw DataError("embedding table: vector buffer does not match id count");
    }
    for (std::size_t i = 0; i < ids_.size(); ++i) index_[ids_[i]] = i;
}

std::vector<float> NodeEmbeddingTable::lookup(const std::string& id) const {
    auto it = index_.find(id);
    if (it == index_.end()) {
        log::warn("graph embedding: unknown protein '" + id + "', using zero fallback vector");
        return std::vector<float>(static_cast<std::size_t>(dim_), 0.0f);
    }
    const float* base = vectors_.data() + it->second * static_cast<std::size_t>(dim_);
    return std::vector<float>(base, base + dim_);
}

NodeEmbeddingTable train_skipgram(const PpiGraph& graph, const WalkCorpus& corpus,
                                  const Node2VecConfig& cfg, std::uint64_t seed) {
    if (corpus.walks.empty()) throw DataError("skip-gram: empty walk corpus");
    const int n = graph.node_count();
    const int dim = cfg.dim;

    // Unigram^(3/4) negative-sampling table over corpus token counts.
    std::vector<double> freq(static_cast<std::size_t>(n), 0.0);
    std::int64_t total_tokens = 0;
    for (const auto& walk : corpus.walks) {
        for (int node : walk) {
            freq[static_cast<std::size_t>(node)] += 1.0;
            total_tokens += 1;
        }
    }
    std::vector<double> neg_cdf(static_cast<std::size_t>(n), 0.0);
    double z = 0.0;
    for (int i = 0; i < n; ++i) z += std::pow(freq[static_cast<std::size_t>(i)], 0.75);
    double cum = 0.0;
    for (int i = 0; i < n; ++i) {
        cum += std::pow(freq[static_cast<std::size_t>(i)], 0.75) / z;
        neg_cdf[static_cast<std::size_t>(i)] = cum;
    }
    auto draw_negative = [&](Rng& rng) {
        const double u = rng.uniform();
        const auto it = std::lower_bound(neg_cdf.begin(), neg_cdf.end(), u);
        return static_cast<int>(std::min<std::size_t>(
            static_cast<std::size_t>(it - neg_cdf.begin()), static_cast<std::size_t>(n - 1)));
    };

    // Input and output tables, word2vec-style initialization.
    Rng init_rng(derive_seed(seed, 0x1417ULL));
    std::vector<float> syn0(static_cast<std::size_t>(n) * dim);
    std::vector<float> syn1(static_cast<std::size_t>(n) * dim, 0.0f);
    for (auto& x : syn0) {
        x = static_cast<float>((init_rng.uniform() - 0.5) / static_cast<double>(dim));
    }

    const std::int64_t total_centers =
        static_cast<std::int64_t>(total_tokens) * std::max(1, cfg.epochs);
    std::int64_t processed = 0;
    std::vector<float> hidden_grad(static_cast<std::size_t>(dim));
    Rng rng(derive_seed(seed, 0x5b1efULL));

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        for (const auto& walk : corpus.walks) {
            for (std::size_t ci = 0; ci < walk.size(); ++ci) {
                const double progress =
                    static_cast<double>(processed) / static_cast<double>(total_centers);
                const double lr = std::max(cfg.lr * (1.0 - progress), cfg.lr * 1e-4);
                processed += 1;
                const int center = walk[ci];
                const std::size_t lo = ci >= static_cast<std::size_t>(cfg.window)
                                           ? ci - static_cast<std::size_t>(cfg.window)
                                           : 0;
                const std::size_t hi =
                    std::min(walk.size(), ci + static_cast<std::size_t>(cfg.window) + 1);
                for (std::size_t xi = lo; xi < hi; ++xi) {
                    if (xi == ci) continue;
                    const int context = walk[xi];
                    float* v_in = syn0.data() + static_cast<std::size_t>(context) * dim;
                    std::fill(hidden_grad.begin(), hidden_grad.end(), 0.0f);
                    for (int s = 0; s <= cfg.negatives; ++s) {
                        int target;
                        double label;
                        if (s == 0) {
                            target = center;
                            label = 1.0;
                        } else {
                            target = draw_negative(rng);
                            if (target == center) continue;
                            label = 0.0;
                        }
                        float* v_out = syn1.data() + static_cast<std::size_t>(target) * dim;
                        const double score =
                            kernels::dot(v_in, v_out, static_cast<std::size_t>(dim));
                        const double clipped = std::max(-30.0, std::min(30.0, score));
                        const double pred = 1.0 / (1.0 + std::exp(-clipped));
                        const float g = static_cast<float>((label - pred) * lr);
                        kernels::axpy(g, v_out, hidden_grad.data(), static_cast<std::size_t>(dim));
                        kernels::axpy(g, v_in, v_out, static_cast<std::size_t>(dim));
                    }
                    kernels::axpy(1.0f, hidden_grad.data(), v_in, static_cast<std::size_t>(dim));
                }
            }
        }
    }

    for (float x : syn0) {
        if (!std::isfinite(x)) throw NumericError("skip-gram: non-finite embedding value");
    }
    std::vector<std::string> ids(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) ids[static_cast<std::size_t>(i)] = graph.id_of(i);
    return NodeEmbeddingTable(dim, std::move(ids), std::move(syn0));
}

NodeEmbeddingTable node2vec_embeddings(const PpiGraph& graph, const Node2VecConfig& cfg,
                                       std::uint64_t seed) {
    const WalkCorpus corpus =
        generate_walks(graph, cfg.walks_per_node, cfg.walk_length, cfg.p, cfg.q, seed);
    return train_skipgram(graph, corpus, cfg, seed);
}

}  // namespace scmppi
