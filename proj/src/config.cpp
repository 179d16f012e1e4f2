#include "scmppi/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "scmppi/errors.hpp"
#include "scmppi/hash.hpp"

namespace scmppi {

void PipelineConfig::validate() const {
    if (kappa < 0.0) throw DataError("config: kappa must be nonnegative");
    if (temperature <= 0.0) throw DataError("config: temperature must be positive");
    if (neg_threshold < -1.0 || neg_threshold > 1.0) {
        throw DataError("config: neg_threshold must lie in [-1, 1]");
    }
    if (lr <= 0.0) throw DataError("config: lr must be positive");
    if (batch_size < 2) throw DataError("config: batch_size must be at least 2");
    if (max_epochs < 1) throw DataError("config: max_epochs must be at least 1");
    if (patience < 1) throw DataError("config: patience must be at least 1");
    if (val_fraction <= 0.0 || val_fraction >= 1.0) {
        throw DataError("config: val_fraction must lie in (0, 1)");
    }
    if (!seq_on && !graph_on) {
        throw DataError("config: seq_on and graph_on cannot both be disabled");
    }
    encoder.validate();
    if (node2vec.dim != encoder.graph_dim) {
        throw DataError("config: node2vec dimension is derived from graph_dim; do not diverge");
    }
    if (node2vec.p <= 0.0 || node2vec.q <= 0.0) {
        throw DataError("config: node2vec p and q must be positive");
    }
    if (node2vec.walks_per_node < 1 || node2vec.walk_length < 1 || node2vec.window < 1 ||
        node2vec.negatives < 0 || node2vec.epochs < 1 || node2vec.lr <= 0.0) {
        throw DataError("config: invalid node2vec settings");
    }
}

std::string format_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

namespace {

std::string format_bool(bool b) { return b ? "true" : "false"; }

std::string mode_name(ContrastMode m) {
    return m == ContrastMode::PairLabel ? "pair_label" : "protein_anchor";
}

ContrastMode parse_mode(const std::string& s, const std::string& origin) {
    if (s == "pair_label") return ContrastMode::PairLabel;
    if (s == "protein_anchor") return ContrastMode::ProteinAnchor;
    throw DataError(origin + ": unknown contrastive_mode '" + s + "'");
}

double parse_double(const std::string& s, const std::string& origin) {
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw DataError(origin + ": expected a number, got '" + s + "'");
    }
}

int parse_int(const std::string& s, const std::string& origin) {
    int v = 0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
        throw DataError(origin + ": expected an integer, got '" + s + "'");
    }
    return v;
}

std::uint64_t parse_u64(const std::string& s, const std::string& origin) {
    std::uint64_t v = 0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
        throw DataError(origin + ": expected an unsigned integer, got '" + s + "'");
    }
    return v;
}

bool parse_bool(const std::string& s, const std::string& origin) {
    if (s == "true" || s == "1") return true;
    if (s == "false" || s == "0") return false;
    throw DataError(origin + ": expected true/false, got '" + s + "'");
}

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

}  // namespace

std::string serialize_config(const PipelineConfig& cfg) {
    std::ostringstream os;
    os << "seed = " << cfg.seed << '\n';
    os << "kappa = " << format_double(cfg.kappa) << '\n';
    os << "temperature = " << format_double(cfg.temperature) << '\n';
    os << "neg_threshold = " << format_double(cfg.neg_threshold) << '\n';
    os << "contrastive_mode = " << mode_name(cfg.contrastive_mode) << '\n';
    os << "lr = " << format_double(cfg.lr) << '\n';
    os << "batch_size = " << cfg.batch_size << '\n';
    os << "max_epochs = " << cfg.max_epochs << '\n';
    os << "patience = " << cfg.patience << '\n';
    os << "val_fraction = " << format_double(cfg.val_fraction) << '\n';
    os << "adam_beta1 = " << format_double(cfg.adam_beta1) << '\n';
    os << "adam_beta2 = " << format_double(cfg.adam_beta2) << '\n';
    os << "adam_eps = " << format_double(cfg.adam_eps) << '\n';
    os << "weight_decay = " << format_double(cfg.weight_decay) << '\n';
    os << "seq_on = " << format_bool(cfg.seq_on) << '\n';
    os << "graph_on = " << format_bool(cfg.graph_on) << '\n';
    os << "cl_on = " << format_bool(cfg.cl_on) << '\n';
    os << "sanitize = " << format_bool(cfg.sanitize) << '\n';
    os << "k = " << cfg.encoder.k << '\n';
    os << "embed_dim = " << cfg.encoder.embed_dim << '\n';
    os << "conv1_channels = " << cfg.encoder.conv1_channels << '\n';
    os << "conv2_channels = " << cfg.encoder.conv2_channels << '\n';
    os << "conv_kernel = " << cfg.encoder.conv_kernel << '\n';
    os << "conv_stride = " << cfg.encoder.conv_stride << '\n';
    os << "conv_padding = " << cfg.encoder.conv_padding << '\n';
    os << "pool_window = " << cfg.encoder.pool_window << '\n';
    os << "conv_dim = " << cfg.encoder.conv_dim << '\n';
    os << "seq_dim = " << cfg.encoder.seq_dim << '\n';
    os << "fusion_dim = " << cfg.encoder.fusion_dim << '\n';
    os << "proj_dim = " << cfg.encoder.proj_dim << '\n';
    os << "graph_dim = " << cfg.encoder.graph_dim << '\n';
    os << "n2v_p = " << format_double(cfg.node2vec.p) << '\n';
    os << "n2v_q = " << format_double(cfg.node2vec.q) << '\n';
    os << "n2v_walks = " << cfg.node2vec.walks_per_node << '\n';
    os << "n2v_walk_length = " << cfg.node2vec.walk_length << '\n';
    os << "n2v_window = " << cfg.node2vec.window << '\n';
    os << "n2v_negatives = " << cfg.node2vec.negatives << '\n';
    os << "n2v_epochs = " << cfg.node2vec.epochs << '\n';
    os << "n2v_lr = " << format_double(cfg.node2vec.lr) << '\n';
    return os.str();
}

PipelineConfig parse_config_text(const std::string& text, const std::string& origin) {
    PipelineConfig cfg;
    std::map<std::string, std::function<void(const std::string&, const std::string&)>> setters;
    setters["seed"] = [&](const std::string& v, const std::string& o) { cfg.seed = parse_u64(v, o); };
    setters["kappa"] = [&](const std::string& v, const std::string& o) { cfg.kappa = parse_double(v, o); };
    setters["temperature"] = [&](const std::string& v, const std::string& o) { cfg.temperature = parse_double(v, o); };
    setters["neg_threshold"] = [&](const std::string& v, const std::string& o) { cfg.neg_threshold = parse_double(v, o); };
    setters["contrastive_mode"] = [&](const std::string& v, const std::string& o) { cfg.contrastive_mode = parse_mode(v, o); };
    setters["lr"] = [&](const std::string& v, const std::string& o) { cfg.lr = parse_double(v, o); };
    setters["batch_size"] = [&](const std::string& v, const std::string& o) { cfg.batch_size = parse_int(v, o); };
    setters["max_epochs"] = [&](const std::string& v, const std::string& o) { cfg.max_epochs = parse_int(v, o); };
    setters["patience"] = [&](const std::string& v, const std::string& o) { cfg.patience = parse_int(v, o); };
    setters["val_fraction"] = [&](const std::string& v, const std::string& o) { cfg.val_fraction = parse_double(v, o); };
    setters["adam_beta1"] = [&](const std::string& v, const std::string& o) { cfg.adam_beta1 = parse_double(v, o); };
    setters["adam_beta2"] = [&](const std::string& v, const std::string& o) { cfg.adam_beta2 = parse_double(v, o); };
    setters["adam_eps"] = [&](const std::string& v, const std::string& o) { cfg.adam_eps = parse_double(v, o); };
    setters["weight_decay"] = [&](const std::string& v, const std::string& o) { cfg.weight_decay = parse_double(v, o); };
    setters["seq_on"] = [&](const std::string& v, const std::string& o) { cfg.seq_on = parse_bool(v, o); };
    setters["graph_on"] = [&](const std::string& v, const std::string& o) { cfg.graph_on = parse_bool(v, o); };
    setters["cl_on"] = [&](const std::string& v, const std::string& o) { cfg.cl_on = parse_bool(v, o); };
    setters["sanitize"] = [&](const std::string& v, const std::string& o) { cfg.sanitize = parse_bool(v, o); };
    setters["k"] = [&](const std::string& v, const std::string& o) { cfg.encoder.k = parse_int(v, o); };
    setters["embed_dim"] = [&](const std::string& v, const std::string& o) { cfg.encoder.embed_dim = parse_int(v, o); };
    setters["conv1_channels"] = [&](const std::string& v, const std::string& o) { cfg.encoder.conv1_channels = parse_int(v, o); };
    setters["conv2_channels"] = [&](const std::string& v, const std::string& o) { cfg.encoder.conv2_channels = parse_int(v, o); };
    setters["conv_kernel"] = [&](const std::string& v, const std::string& o) { cfg.encoder.conv_kernel = parse_int(v, o); };
    setters["conv_stride"] = [&](const std::string& v, const std::string& o) { cfg.encoder.conv_stride = parse_int(v, o); };
    setters["conv_padding"] = [&](const std::string& v, const std::string& o) { cfg.encoder.conv_padding = parse_int(v, o); };
    setters["pool_window"] = [&](const std::string& v, const std::string& o) { cfg.encoder.pool_window = parse_int(v, o); };
    setters["conv_dim"] = [&](const std::string& v, const std::string& o) { cfg.encoder.conv_dim = parse_int(v, o); };
    setters["seq_dim"] = [&](const std::string& v, const std::string& o) { cfg.encoder.seq_dim = parse_int(v, o); };
    setters["fusion_dim"] = [&](const std::string& v, const std::string& o) { cfg.encoder.fusion_dim = parse_int(v, o); };
    setters["proj_dim"] = [&](const std::string& v, const std::string& o) { cfg.encoder.proj_dim = parse_int(v, o); };
    setters["graph_dim"] = [&](const std::string& v, const std::string& o) {
        cfg.encoder.graph_dim = parse_int(v, o);
        cfg.node2vec.dim = cfg.encoder.graph_dim;
    };
    setters["n2v_p"] = [&](const std::string& v, const std::string& o) { cfg.node2vec.p = parse_double(v, o); };
    setters["n2v_q"] = [&](const std::string& v, const std::string& o) { cfg.node2vec.q = parse_double(v, o); };
    setters["n2v_walks"] = [&](const std::string& v, const std::string& o) { cfg.node2vec.walks_per_node = parse_int(v, o); };
    setters["n2v_walk_length"] = [&](const std::string& v, const std::string& o) { cfg.node2vec.walk_length = parse_int(v, o); };
    setters["n2v_window"] = [&](const std::string& v, const std::string& o) { cfg.node2vec.window = parse_int(v, o); };
    setters["n2v_negatives"] = [&](const std::string& v, const std::string& o) { cfg.node2vec.negatives = parse_int(v, o); };
    setters["n2v_epochs"] = [&](const std::string& v, const std::string& o) { cfg.node2vec.epochs = parse_int(v, o); };
    setters["n2v_lr"] = [&](const std::string& v, const std::string& o) { cfg.node2vec.lr = parse_double(v, o); };

    std::istringstream is(text);
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        lineno += 1;
        const std::string where = origin + ":" + std::to_string(lineno);
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        line = trim(line);
        if (line.empty()) continue;
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos) {
            throw DataError(where + ": expected 'key = value', got '" + line + "'");
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        auto it = setters.find(key);
        if (it == setters.end()) throw DataError(where + ": unknown config key '" + key + "'");
        it->second(value, where);
    }
    // graph_dim may have been set after n2v keys; re-sync.
    cfg.node2vec.dim = cfg.encoder.graph_dim;
    return cfg;
}

PipelineConfig load_config_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("config: cannot open " + path);
    std::ostringstream os;
    os << in.rdbuf();
    return parse_config_text(os.str(), path);
}

std::uint64_t config_hash(const PipelineConfig& cfg) { return fnv1a64(serialize_config(cfg)); }

}  // namespace scmppi
