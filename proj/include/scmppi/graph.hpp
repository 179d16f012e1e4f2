#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace scmppi {

// Undirected weighted interaction graph. Node ids are mapped onto dense
// indices in sorted-id order so downstream seeding does not depend on edge
// file order. Adjacency lists are sorted by neighbor index.
class PpiGraph {
public:
    struct Neighbor {
        int node = 0;
        float weight = 1.0f;
    };

    // Builds from undirected edges given as (id_a, id_b, weight). Assumes the
    // caller already removed self-loops and duplicates (the edge parser does).
    static PpiGraph build(const std::vector<std::tuple<std::string, std::string, float>>& edges);

    // Same, but keeps the given nodes present even if no edge touches them.
    static PpiGraph build_with_nodes(
        const std::vector<std::string>& node_ids,
        const std::vector<std::tuple<std::string, std::string, float>>& edges);

    int node_count() const { return static_cast<int>(ids_.size()); }
    std::int64_t edge_count() const { return edge_count_; }
    const std::string& id_of(int node) const { return ids_.at(static_cast<std::size_t>(node)); }
    int index_of(const std::string& id) const;  // -1 when absent
    const std::vector<Neighbor>& neighbors(int node) const {
        return adjacency_.at(static_cast<std::size_t>(node));
    }
    bool has_edge(int a, int b) const;
    bool has_edge(const std::string& a, const std::string& b) const;

private:
    std::vector<std::string> ids_;
    std::map<std::string, int> index_;
    std::vector<std::vector<Neighbor>> adjacency_;
    std::int64_t edge_count_ = 0;
};

struct LeakageRemoval {
    PpiGraph graph;
    std::int64_t removed_edges = 0;
};

// Returns a copy of the graph with every edge that appears in eval_pairs
// (either orientation) deleted. Pairs that are not edges are ignored.
LeakageRemoval remove_leakage_edges(const PpiGraph& graph,
                                    const std::vector<std::pair<std::string, std::string>>& eval_pairs);

// Second-order walk bias: starting from `prev` (t) and standing at `curr`
// (v), the unnormalized score of neighbor x is alpha * w(v,x) with
// alpha = 1/p when x == t, 1 when x is adjacent to t, 1/q otherwise. At a
// walk start pass prev = kWalkStart and alpha is 1 everywhere. The result
// sums to 1 and is empty when curr has no neighbors.
inline constexpr int kWalkStart = -1;
std::vector<double> transition_distribution(const PpiGraph& graph, int prev, int curr, double p,
                                            double q);

struct WalkCorpus {
    std::vector<std::vector<int>> walks;
};

struct Node2VecConfig {
    double p = 1.0;
    double q = 1.0;
    int walks_per_node = 10;
    int walk_length = 80;
    int window = 10;
    int negatives = 5;
    int epochs = 5;
    double lr = 0.025;
    int dim = 64;
};

// r walks per node in seeded shuffled node order; each walk uses an
// independent generator derived from (seed, repetition, start node), so the
// corpus is reproducible step for step.
WalkCorpus generate_walks(const PpiGraph& graph, int walks_per_node, int walk_length, double p,
                          double q, std::uint64_t seed);

class NodeEmbeddingTable {
public:
    NodeEmbeddingTable() = default;
    NodeEmbeddingTable(int dim, std::vector<std::string> ids, std::vector<float> vectors);

    int dim() const { return dim_; }
    std::size_t size() const { return ids_.size(); }
    const std::vector<std::string>& ids() const { return ids_; }

    // Stored vector for a known id; the zero fallback vector (with a logged
    // warning) otherwise.
    std::vector<float> lookup(const std::string& id) const;
    bool contains(const std::string& id) const { return index_.count(id) > 0; }

private:
    int dim_ = 0;
    std::vector<std::string> ids_;
    std::vector<float> vectors_;  // size() x dim_
    std::map<std::string, std::size_t> index_;
};

// Skip-gram with negative sampling over (center, context) pairs within the
// window; negatives come from the unigram^(3/4) distribution over corpus
// tokens. Single-threaded and bit-reproducible for a fixed seed.
NodeEmbeddingTable train_skipgram(const PpiGraph& graph, const WalkCorpus& corpus,
                                  const Node2VecConfig& cfg, std::uint64_t seed);

// Full pipeline: walks then skip-gram.
NodeEmbeddingTable node2vec_embeddings(const PpiGraph& graph, const Node2VecConfig& cfg,
                                       std::uint64_t seed);

}  // namespace scmppi
