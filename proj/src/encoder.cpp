#include "scmppi/encoder.hpp"

#include <cmath>

#include "scmppi/hash.hpp"
#include "scmppi/rng.hpp"

namespace scmppi {

void EncoderConfig::validate() const {
    auto positive = [](int v, const char* what) {
        if (v < 1) throw DataError(std::string("encoder config: ") + what + " must be positive");
    };
    positive(embed_dim, "embed_dim");
    positive(conv1_channels, "conv1_channels");
    positive(conv2_channels, "conv2_channels");
    positive(conv_kernel, "conv_kernel");
    positive(conv_stride, "conv_stride");
    positive(pool_window, "pool_window");
    positive(conv_dim, "conv_dim");
    positive(seq_dim, "seq_dim");
    positive(fusion_dim, "fusion_dim");
    positive(proj_dim, "proj_dim");
    positive(graph_dim, "graph_dim");
    if (k < 0) throw DataError("encoder config: k must be nonnegative");
    if (conv_padding < 0) throw DataError("encoder config: conv_padding must be nonnegative");
    if (proj_dim > fusion_dim) {
        throw DataError("encoder config: proj_dim must not exceed fusion_dim");
    }
    if (conv_out(20) < 1 || conv_out(conv_out(20)) < 1) {
        throw DataError("encoder config: conv geometry collapses the 20x20 grid");
    }
}

Tensor he_uniform(std::vector<int> shape, int fan_in, std::uint64_t seed) {
    Tensor t = Tensor::zeros(std::move(shape));
    const double bound = std::sqrt(6.0 / static_cast<double>(fan_in));
    Rng rng(seed);
    for (auto& x : t.data) x = static_cast<float>(rng.uniform(-bound, bound));
    return t;
}

void init_model_params(ParamStore& store, const EncoderConfig& cfg, std::uint64_t seed) {
    cfg.validate();
    auto weight = [&](const std::string& name, std::vector<int> shape, int fan_in) {
        store.add(name, he_uniform(std::move(shape), fan_in, derive_seed(seed, fnv1a64(name))));
    };
    auto bias = [&](const std::string& name, int n) { store.add(name, Tensor::zeros({n})); };

    const int kk = cfg.conv_kernel;
    weight("enc.conv1.k", {cfg.conv1_channels, cfg.cksaap_channels(), kk, kk},
           cfg.cksaap_channels() * kk * kk);
    weight("enc.conv2.k", {cfg.conv2_channels, cfg.conv1_channels, kk, kk},
           cfg.conv1_channels * kk * kk);
    weight("enc.conv_fc.w", {cfg.conv_dim, cfg.flat_dim()}, cfg.flat_dim());
    bias("enc.conv_fc.b", cfg.conv_dim);
    weight("enc.seq_fc.w", {cfg.seq_dim, cfg.conv_dim + 420}, cfg.conv_dim + 420);
    bias("enc.seq_fc.b", cfg.seq_dim);
    weight("enc.fuse.w", {cfg.fusion_dim, cfg.seq_dim + cfg.graph_dim},
           cfg.seq_dim + cfg.graph_dim);
    bias("enc.fuse.b", cfg.fusion_dim);
    weight("proj.fc1.w", {cfg.fusion_dim, cfg.fusion_dim}, cfg.fusion_dim);
    bias("proj.fc1.b", cfg.fusion_dim);
    weight("proj.fc2.w", {cfg.proj_dim, cfg.fusion_dim}, cfg.fusion_dim);
    bias("proj.fc2.b", cfg.proj_dim);
    weight("clf.fc1.w", {cfg.fusion_dim, 2 * cfg.fusion_dim}, 2 * cfg.fusion_dim);
    bias("clf.fc1.b", cfg.fusion_dim);
    weight("clf.fc2.w", {1, cfg.fusion_dim}, cfg.fusion_dim);
    bias("clf.fc2.b", 1);
}

}  // namespace scmppi
