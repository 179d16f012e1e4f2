#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "scmppi/tensor.hpp"

namespace scmppi {

// Dimensions of the multimodal encoder. The CKSAAP branch always sees a
// 20x20 pair grid; everything else is configurable.
struct EncoderConfig {
    int k = 3;             // CKSAAP gap bound
    int embed_dim = 960;   // residue-embedding width D
    int conv1_channels = 16;
    int conv2_channels = 32;
    int conv_kernel = 3;
    int conv_stride = 1;
    int conv_padding = 1;
    int pool_window = 2;
    int conv_dim = 256;    // conv vector width after flatten -> dense
    int seq_dim = 256;
    int fusion_dim = 256;
    int proj_dim = 128;
    int graph_dim = 64;

    int cksaap_channels() const { return (k + 1) * embed_dim; }

    int conv_out(int extent) const {
        return (extent + 2 * conv_padding - conv_kernel) / conv_stride + 1;
    }

    int pooled_extent() const {
        const int after = conv_out(conv_out(20));
        return (after + pool_window - 1) / pool_window;
    }

    int flat_dim() const { return conv2_channels * pooled_extent() * pooled_extent(); }

    void validate() const;
};

// Registers all encoder, projector, and classifier parameters. Weights are
// He-uniform with a generator keyed by (seed, parameter name); biases start
// at zero.
void init_model_params(ParamStore& store, const EncoderConfig& cfg, std::uint64_t seed);

Tensor he_uniform(std::vector<int> shape, int fan_in, std::uint64_t seed);

// Parameter leaves for one forward pass.
template <typename T>
struct ParamLeases {
    std::map<std::string, typename TapeT<T>::Value> ids;

    typename TapeT<T>::Value get(const std::string& name) const {
        auto it = ids.find(name);
        if (it == ids.end()) throw DataError("encoder: missing parameter lease " + name);
        return it->second;
    }
};

// Places every parameter onto the tape. Pass for_training = false for pure
// inference so the reverse pass has nothing to track.
template <typename T>
ParamLeases<T> lease_params(TapeT<T>& tape, const ParamStore& store, bool for_training = true) {
    ParamLeases<T> leases;
    for (std::size_t i = 0; i < store.count(); ++i) {
        leases.ids[store.name(i)] =
            tape.leaf(TensorT<T>::from(store.value(i)), for_training && store.trainable(i));
    }
    return leases;
}

// conv(3x3) -> ReLU -> conv(3x3) -> ReLU -> maxpool -> flatten -> dense ->
// ReLU, then concat with AAC/DPC and a final dense -> ReLU to seq_dim.
template <typename T>
typename TapeT<T>::Value encode_sequence_node(TapeT<T>& tape, const EncoderConfig& cfg,
                                              const ParamLeases<T>& params,
                                              typename TapeT<T>::Value cksaap,
                                              typename TapeT<T>::Value aac,
                                              typename TapeT<T>::Value dpc) {
    const auto& shape = tape.val(cksaap).shape;
    if (shape.size() != 3 || shape[0] != cfg.cksaap_channels() || shape[1] != 20 ||
        shape[2] != 20) {
        throw DataError("encoder: CKSAAP tensor " + Tensor::shape_str(shape) +
                        " does not match configured channels " +
                        std::to_string(cfg.cksaap_channels()));
    }
    auto c1 = tape.relu(tape.conv2d(cksaap, params.get("enc.conv1.k"), cfg.conv_stride,
                                    cfg.conv_padding));
    auto c2 = tape.relu(tape.conv2d(c1, params.get("enc.conv2.k"), cfg.conv_stride,
                                    cfg.conv_padding));
    auto pooled = tape.maxpool2(c2, cfg.pool_window);
    auto flat = tape.reshape(pooled, {cfg.flat_dim()});
    auto conv_vec =
        tape.relu(tape.dense(flat, params.get("enc.conv_fc.w"), params.get("enc.conv_fc.b")));
    auto cat = tape.concat({conv_vec, aac, dpc});
    return tape.relu(tape.dense(cat, params.get("enc.seq_fc.w"), params.get("enc.seq_fc.b")));
}

// dense(ReLU) over [seq_vec || node_vec] -> fusion_dim.
template <typename T>
typename TapeT<T>::Value fuse_node(TapeT<T>& tape, const EncoderConfig& cfg,
                                   const ParamLeases<T>& params, typename TapeT<T>::Value seq_vec,
                                   typename TapeT<T>::Value node_vec) {
    if (tape.val(seq_vec).size() != cfg.seq_dim || tape.val(node_vec).size() != cfg.graph_dim) {
        throw DataError("fuse: input dims do not match config (seq " +
                        std::to_string(tape.val(seq_vec).size()) + ", node " +
                        std::to_string(tape.val(node_vec).size()) + ")");
    }
    auto cat = tape.concat({seq_vec, node_vec});
    return tape.relu(tape.dense(cat, params.get("enc.fuse.w"), params.get("enc.fuse.b")));
}

// dense -> ReLU -> dense -> L2 normalization (eps-guarded).
template <typename T>
typename TapeT<T>::Value project_node(TapeT<T>& tape, const EncoderConfig& cfg,
                                      const ParamLeases<T>& params,
                                      typename TapeT<T>::Value fused) {
    (void)cfg;
    auto h = tape.relu(tape.dense(fused, params.get("proj.fc1.w"), params.get("proj.fc1.b")));
    auto o = tape.dense(h, params.get("proj.fc2.w"), params.get("proj.fc2.b"));
    return tape.l2_normalize(o, 1e-8);
}

// [F_i || F_j] -> dense -> ReLU -> dense -> sigmoid, a scalar in (0,1).
template <typename T>
typename TapeT<T>::Value classify_pair_node(TapeT<T>& tape, const ParamLeases<T>& params,
                                            typename TapeT<T>::Value f_i,
                                            typename TapeT<T>::Value f_j) {
    auto cat = tape.concat({f_i, f_j});
    auto h = tape.relu(tape.dense(cat, params.get("clf.fc1.w"), params.get("clf.fc1.b")));
    auto logit = tape.dense(h, params.get("clf.fc2.w"), params.get("clf.fc2.b"));
    return tape.sigmoid(logit);
}

}  // namespace scmppi
