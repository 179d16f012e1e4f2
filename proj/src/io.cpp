#include "scmppi/io.hpp"

#include <algorithm>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "scmppi/errors.hpp"
#include "scmppi/hash.hpp"
#include "scmppi/log.hpp"

namespace fs = std::filesystem;

namespace scmppi {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_tabs(const std::string& line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t tab = line.find('\t', start);
        if (tab == std::string::npos) {
            out.push_back(line.substr(start));
            break;
        }
        out.push_back(line.substr(start, tab - start));
        start = tab + 1;
    }
    for (auto& f : out) f = trim(f);
    return out;
}

std::ifstream open_input(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path);
    return in;
}

std::ofstream open_output(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path);
    return out;
}

// Little-endian primitives for the binary containers.
template <typename T>
void put_le(std::string& buf, T v) {
    for (std::size_t i = 0; i < sizeof(T); ++i) {
        buf.push_back(static_cast<char>((static_cast<std::uint64_t>(v) >> (8 * i)) & 0xff));
    }
}

void put_f32(std::string& buf, float v) {
    std::uint32_t bits;
    std::memcpy(&bits, &v, 4);
    put_le(buf, bits);
}

class ByteReader {
public:
    ByteReader(std::string data, std::string origin)
        : data_(std::move(data)), origin_(std::move(origin)) {}

    template <typename T>
    T get_le() {
        need(sizeof(T));
        std::uint64_t v = 0;
        for (std::size_t i = 0; i < sizeof(T); ++i) {
            v |= static_cast<std::uint64_t>(static_cast<unsigned char>(data_[pos_ + i])) << (8 * i);
        }
        pos_ += sizeof(T);
        return static_cast<T>(v);
    }

    float get_f32() {
        const std::uint32_t bits = get_le<std::uint32_t>();
        float v;
        std::memcpy(&v, &bits, 4);
        return v;
    }

    std::string get_bytes(std::size_t n) {
        need(n);
        std::string out = data_.substr(pos_, n);
        pos_ += n;
        return out;
    }

    std::size_t offset() const { return pos_; }
    bool exhausted() const { return pos_ == data_.size(); }

private:
    void need(std::size_t n) {
        if (pos_ + n > data_.size()) {
            throw DataError(origin_ + ": truncated at byte offset " + std::to_string(pos_) +
                            " (need " + std::to_string(n) + " more bytes, have " +
                            std::to_string(data_.size() - pos_) + ")");
        }
    }

    std::string data_;
    std::string origin_;
    std::size_t pos_ = 0;
};

std::string slurp(const std::string& path) {
    auto in = open_input(path);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

}  // namespace

// ---- FASTA -----------------------------------------------------------------

std::vector<ProteinSequence> parse_fasta(const std::string& path, SanitizePolicy policy) {
    auto in = open_input(path);
    std::vector<ProteinSequence> out;
    std::set<std::string> seen;
    std::string line, id, buffer;
    int lineno = 0, record_line = 0;
    auto flush = [&]() {
        if (id.empty()) return;
        if (buffer.empty()) {
            throw DataError(path + ":" + std::to_string(record_line) + ": record '" + id +
                            "' has no sequence");
        }
        if (!seen.insert(id).second) {
            throw DataError(path + ":" + std::to_string(record_line) + ": duplicate id '" + id +
                            "'");
        }
        out.push_back(make_protein_sequence(id, buffer, policy));
        id.clear();
        buffer.clear();
    };
    while (std::getline(in, line)) {
        lineno += 1;
        line = trim(line);
        if (line.empty()) continue;
        if (line[0] == '>') {
            flush();
            std::istringstream hs(line.substr(1));
            hs >> id;
            if (id.empty()) {
                throw DataError(path + ":" + std::to_string(lineno) + ": empty record header");
            }
            record_line = lineno;
        } else {
            if (id.empty()) {
                throw DataError(path + ":" + std::to_string(lineno) +
                                ": sequence data before any header");
            }
            buffer += line;
        }
    }
    flush();
    return out;
}

void write_fasta(const std::string& path, const std::vector<ProteinSequence>& seqs) {
    auto out = open_output(path);
    for (const auto& s : seqs) {
        out << '>' << s.id << '\n';
        for (std::size_t i = 0; i < s.residues.size(); i += 60) {
            out << s.residues.substr(i, 60) << '\n';
        }
    }
}

// ---- pairs and edges ---------------------------------------------------------

PairFile parse_pairs(const std::string& path) {
    auto in = open_input(path);
    PairFile out;
    std::set<std::pair<std::string, std::string>> seen;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        lineno += 1;
        const std::string where = path + ":" + std::to_string(lineno);
        line = trim(line);
        if (line.empty() || line[0] == '#') continue;
        const auto fields = split_tabs(line);
        if (fields.size() != 3 || fields[0].empty() || fields[1].empty()) {
            throw DataError(where + ": expected 'id_a<TAB>id_b<TAB>label'");
        }
        int label;
        if (fields[2] == "0") {
            label = 0;
        } else if (fields[2] == "1") {
            label = 1;
        } else {
            throw DataError(where + ": label must be 0 or 1, got '" + fields[2] + "'");
        }
        auto key = std::minmax(fields[0], fields[1]);
        if (!seen.insert({key.first, key.second}).second) out.duplicate_count += 1;
        out.pairs.push_back(PairSample{fields[0], fields[1], label});
    }
    if (out.duplicate_count > 0) {
        log::warn(path + ": " + std::to_string(out.duplicate_count) + " duplicate pair(s)");
    }
    return out;
}

std::vector<std::pair<std::string, std::string>> parse_pair_list(const std::string& path) {
    auto in = open_input(path);
    std::vector<std::pair<std::string, std::string>> out;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        lineno += 1;
        line = trim(line);
        if (line.empty() || line[0] == '#') continue;
        const auto fields = split_tabs(line);
        if (fields.size() < 2 || fields[0].empty() || fields[1].empty()) {
            throw DataError(path + ":" + std::to_string(lineno) +
                            ": expected at least 'id_a<TAB>id_b'");
        }
        out.emplace_back(fields[0], fields[1]);
    }
    return out;
}

EdgeFile parse_edges(const std::string& path) {
    auto in = open_input(path);
    std::map<std::pair<std::string, std::string>, float> weights;
    std::int64_t dropped_self = 0, duplicates = 0;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        lineno += 1;
        const std::string where = path + ":" + std::to_string(lineno);
        line = trim(line);
        if (line.empty() || line[0] == '#') continue;
        const auto fields = split_tabs(line);
        if (fields.size() < 2 || fields.size() > 3 || fields[0].empty() || fields[1].empty()) {
            throw DataError(where + ": expected 'id_a<TAB>id_b[<TAB>weight]'");
        }
        float w = 1.0f;
        if (fields.size() == 3) {
            try {
                std::size_t used = 0;
                w = std::stof(fields[2], &used);
                if (used != fields[2].size()) throw std::invalid_argument(fields[2]);
            } catch (const std::exception&) {
                throw DataError(where + ": bad weight '" + fields[2] + "'");
            }
        }
        if (!(w > 0.0f)) throw DataError(where + ": weight must be positive");
        if (fields[0] == fields[1]) {
            dropped_self += 1;
            continue;
        }
        auto key = std::minmax(fields[0], fields[1]);
        auto [it, inserted] = weights.try_emplace({key.first, key.second}, w);
        if (!inserted) {
            duplicates += 1;
            it->second = w;  // last weight wins
        }
    }
    if (dropped_self > 0) {
        log::warn(path + ": dropped " + std::to_string(dropped_self) + " self-loop(s)");
    }
    if (duplicates > 0) {
        log::warn(path + ": " + std::to_string(duplicates) +
                  " duplicate edge(s), keeping the last weight");
    }
    std::vector<std::tuple<std::string, std::string, float>> edges;
    edges.reserve(weights.size());
    for (const auto& [key, w] : weights) edges.emplace_back(key.first, key.second, w);
    return EdgeFile{PpiGraph::build(edges), dropped_self, duplicates};
}

// ---- REMB ----------------------------------------------------------------------

void write_remb(const std::string& path, const EmbeddingMap& embeddings) {
    int dim = 0;
    for (const auto& [id, m] : embeddings) {
        if (dim == 0) dim = m.dim;
        if (m.dim != dim) throw DataError("remb: inconsistent embedding width for " + id);
        if (m.rows <= 0) throw DataError("remb: empty embedding for " + id);
    }
    if (embeddings.empty()) throw DataError("remb: refusing to write a container with D unknown");
    std::string buf;
    buf += "REMB";
    put_le<std::uint16_t>(buf, 1);
    put_le<std::uint32_t>(buf, static_cast<std::uint32_t>(dim));
    put_le<std::uint64_t>(buf, embeddings.size());
    for (const auto& [id, m] : embeddings) {
        if (id.size() > 0xffff) throw DataError("remb: id too long: " + id);
        put_le<std::uint16_t>(buf, static_cast<std::uint16_t>(id.size()));
        buf += id;
        put_le<std::uint32_t>(buf, static_cast<std::uint32_t>(m.rows));
        for (float v : m.values) put_f32(buf, v);
    }
    open_output(path).write(buf.data(), static_cast<std::streamsize>(buf.size()));
}

EmbeddingMap read_remb(const std::string& path) {
    ByteReader r(slurp(path), path);
    if (r.get_bytes(4) != "REMB") throw DataError(path + ": bad magic, not a REMB file");
    const auto version = r.get_le<std::uint16_t>();
    if (version != 1) {
        throw DataError(path + ": unsupported REMB version " + std::to_string(version));
    }
    const auto dim = r.get_le<std::uint32_t>();
    if (dim == 0) throw DataError(path + ": embedding width D must be positive");
    const auto count = r.get_le<std::uint64_t>();
    EmbeddingMap out;
    for (std::uint64_t rec = 0; rec < count; ++rec) {
        const auto id_len = r.get_le<std::uint16_t>();
        const std::string id = r.get_bytes(id_len);
        const auto rows = r.get_le<std::uint32_t>();
        if (rows == 0) throw DataError(path + ": record '" + id + "' has zero rows");
        ResidueEmbeddingMatrix m;
        m.id = id;
        m.rows = static_cast<int>(rows);
        m.dim = static_cast<int>(dim);
        m.values.resize(static_cast<std::size_t>(rows) * dim);
        for (auto& v : m.values) v = r.get_f32();
        if (!out.emplace(id, std::move(m)).second) {
            throw DataError(path + ": duplicate id '" + id + "'");
        }
    }
    if (!r.exhausted()) {
        throw DataError(path + ": trailing bytes at offset " + std::to_string(r.offset()));
    }
    return out;
}

// ---- checkpoints ------------------------------------------------------------------

void save_checkpoint(const std::string& path, const TrainedModel& model) {
    const std::string config_text = serialize_config(model.config);
    std::ostringstream header;
    header << "SCMPPI-CKPT v1\n";
    header << "config-hash " << std::hex << fnv1a64(config_text) << std::dec << '\n';
    header << "best-epoch " << model.best_epoch << '\n';
    header << "best-val-mcc " << format_double(model.best_val_mcc) << '\n';
    header << "config-begin\n" << config_text << "config-end\n";
    header << "params " << model.params.count() << '\n';
    for (std::size_t i = 0; i < model.params.count(); ++i) {
        const Tensor& t = model.params.value(i);
        header << model.params.name(i) << ' ' << t.shape.size();
        for (int d : t.shape) header << ' ' << d;
        header << '\n';
    }
    header << "blob-begin\n";
    std::string buf = header.str();
    for (std::size_t i = 0; i < model.params.count(); ++i) {
        for (float v : model.params.value(i).data) put_f32(buf, v);
    }
    open_output(path).write(buf.data(), static_cast<std::streamsize>(buf.size()));
}

TrainedModel load_checkpoint(const std::string& path) {
    const std::string raw = slurp(path);
    std::istringstream is(raw);
    std::string line;
    auto next_line = [&](const char* what) {
        if (!std::getline(is, line)) throw DataError(path + ": truncated header, missing " + what);
        return line;
    };
    if (next_line("version") != "SCMPPI-CKPT v1") {
        throw DataError(path + ": unknown checkpoint version or not a checkpoint");
    }
    std::uint64_t stored_hash = 0;
    {
        std::istringstream ls(next_line("config-hash"));
        std::string tag;
        ls >> tag >> std::hex >> stored_hash;
        if (tag != "config-hash" || ls.fail()) throw DataError(path + ": malformed config-hash");
    }
    int best_epoch = 0;
    double best_mcc = 0.0;
    {
        std::istringstream ls(next_line("best-epoch"));
        std::string tag;
        ls >> tag >> best_epoch;
        if (tag != "best-epoch" || ls.fail()) throw DataError(path + ": malformed best-epoch");
    }
    {
        std::istringstream ls(next_line("best-val-mcc"));
        std::string tag, value;
        ls >> tag >> value;
        if (tag != "best-val-mcc" || ls.fail()) throw DataError(path + ": malformed best-val-mcc");
        best_mcc = std::stod(value);
    }
    if (next_line("config-begin") != "config-begin") {
        throw DataError(path + ": missing config-begin");
    }
    std::string config_text;
    while (next_line("config-end") != "config-end") config_text += line + '\n';
    if (fnv1a64(config_text) != stored_hash) {
        throw DataError(path + ": config hash mismatch, checkpoint config was modified");
    }

    TrainedModel model;
    model.config = parse_config_text(config_text, path + "(embedded config)");
    model.best_epoch = best_epoch;
    model.best_val_mcc = best_mcc;

    std::size_t param_count = 0;
    {
        std::istringstream ls(next_line("params"));
        std::string tag;
        ls >> tag >> param_count;
        if (tag != "params" || ls.fail()) throw DataError(path + ": malformed params count");
    }
    std::vector<std::pair<std::string, std::vector<int>>> entries;
    for (std::size_t i = 0; i < param_count; ++i) {
        std::istringstream ls(next_line("param entry"));
        std::string name;
        std::size_t ndim = 0;
        ls >> name >> ndim;
        std::vector<int> shape(ndim);
        for (auto& d : shape) ls >> d;
        if (ls.fail()) throw DataError(path + ": malformed parameter entry for " + name);
        entries.emplace_back(name, std::move(shape));
    }
    if (next_line("blob-begin") != "blob-begin") throw DataError(path + ": missing blob-begin");

    // Shapes must match what the embedded config implies.
    ParamStore expected;
    init_model_params(expected, model.config.encoder, 0);
    if (expected.count() != entries.size()) {
        throw DataError(path + ": parameter count does not match the embedded config");
    }
    for (std::size_t i = 0; i < entries.size(); ++i) {
        if (entries[i].first != expected.name(i) ||
            entries[i].second != expected.value(i).shape) {
            throw DataError(path + ": parameter " + entries[i].first +
                            " has unexpected name or shape for the embedded config");
        }
    }

    const std::size_t blob_offset = static_cast<std::size_t>(is.tellg());
    ByteReader r(raw.substr(blob_offset), path);
    for (std::size_t i = 0; i < entries.size(); ++i) {
        Tensor t = Tensor::zeros(entries[i].second);
        for (auto& v : t.data) v = r.get_f32();
        model.params.add(entries[i].first, std::move(t));
    }
    if (!r.exhausted()) {
        throw DataError(path + ": trailing bytes after parameter blobs");
    }
    return model;
}

// ---- node-embedding TSV ---------------------------------------------------------

void write_embedding_tsv(const std::string& path, const NodeEmbeddingTable& table) {
    auto out = open_output(path);
    for (const auto& id : table.ids()) {
        out << id;
        for (float v : table.lookup(id)) out << '\t' << format_double(static_cast<double>(v));
        out << '\n';
    }
}

NodeEmbeddingTable read_embedding_tsv(const std::string& path) {
    auto in = open_input(path);
    std::vector<std::string> ids;
    std::vector<float> values;
    int dim = -1;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        lineno += 1;
        line = trim(line);
        if (line.empty()) continue;
        const auto fields = split_tabs(line);
        if (fields.size() < 2) {
            throw DataError(path + ":" + std::to_string(lineno) + ": expected id and vector");
        }
        if (dim < 0) {
            dim = static_cast<int>(fields.size()) - 1;
        } else if (static_cast<int>(fields.size()) - 1 != dim) {
            throw DataError(path + ":" + std::to_string(lineno) + ": inconsistent dimension");
        }
        ids.push_back(fields[0]);
        for (std::size_t i = 1; i < fields.size(); ++i) {
            values.push_back(std::stof(fields[i]));
        }
    }
    if (dim < 0) throw DataError(path + ": empty embedding table");
    return NodeEmbeddingTable(dim, std::move(ids), std::move(values));
}

// ---- manifest --------------------------------------------------------------------

DatasetManifest load_manifest(const std::string& path) {
    auto in = open_input(path);
    DatasetManifest m;
    const fs::path base = fs::path(path).parent_path();
    auto resolve = [&](const std::string& p) { return (base / p).string(); };
    std::string line;
    int lineno = 0;
    bool have_d = false;
    while (std::getline(in, line)) {
        lineno += 1;
        const std::string where = path + ":" + std::to_string(lineno);
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        line = trim(line);
        if (line.empty()) continue;
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos) throw DataError(where + ": expected 'key = value'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key == "name") {
            m.name = value;
        } else if (key == "fasta") {
            m.fasta_path = resolve(value);
        } else if (key == "pairs") {
            m.pairs_path = resolve(value);
        } else if (key == "edges") {
            m.edges_path = resolve(value);
        } else if (key == "remb") {
            m.remb_path = resolve(value);
        } else if (key == "k") {
            m.k = std::stoi(value);
        } else if (key == "d") {
            m.embed_dim = std::stoi(value);
            have_d = true;
        } else if (key == "embedder_seed") {
            m.embedder_seed = std::stoull(value);
        } else {
            throw DataError(where + ": unknown manifest key '" + key + "'");
        }
    }
    if (m.fasta_path.empty() || m.pairs_path.empty() || m.edges_path.empty()) {
        throw DataError(path + ": manifest must declare fasta, pairs, and edges");
    }
    if (!have_d || m.embed_dim < 1) {
        throw DataError(path + ": manifest must declare a positive embedding width d");
    }
    for (const std::string& p : {m.fasta_path, m.pairs_path, m.edges_path}) {
        if (!fs::exists(p)) throw DataError(path + ": referenced file does not exist: " + p);
    }
    if (!m.remb_path.empty() && !fs::exists(m.remb_path)) {
        throw DataError(path + ": referenced file does not exist: " + m.remb_path);
    }
    return m;
}

void write_manifest(const std::string& path, const DatasetManifest& m) {
    auto out = open_output(path);
    const fs::path base = fs::path(path).parent_path();
    auto rel = [&](const std::string& p) {
        std::error_code ec;
        const fs::path r = fs::relative(p, base, ec);
        return ec ? p : r.string();
    };
    out << "name = " << m.name << '\n';
    out << "fasta = " << rel(m.fasta_path) << '\n';
    out << "pairs = " << rel(m.pairs_path) << '\n';
    out << "edges = " << rel(m.edges_path) << '\n';
    if (!m.remb_path.empty()) out << "remb = " << rel(m.remb_path) << '\n';
    out << "k = " << m.k << '\n';
    out << "d = " << m.embed_dim << '\n';
    out << "embedder_seed = " << m.embedder_seed << '\n';
}

Dataset load_dataset(const DatasetManifest& manifest, const PipelineConfig& cfg) {
    Dataset ds;
    ds.manifest = manifest;
    const auto policy = cfg.sanitize ? SanitizePolicy::DropUnknown : SanitizePolicy::Reject;
    for (auto& seq : parse_fasta(manifest.fasta_path, policy)) {
        ds.sequences.emplace(seq.id, std::move(seq));
    }
    ds.pairs = parse_pairs(manifest.pairs_path).pairs;
    for (const auto& p : ds.pairs) {
        if (ds.sequences.count(p.id_a) == 0 || ds.sequences.count(p.id_b) == 0) {
            throw DataError("dataset " + manifest.name + ": pair (" + p.id_a + ", " + p.id_b +
                            ") references a protein without a sequence");
        }
    }
    ds.graph = parse_edges(manifest.edges_path).graph;
    if (!manifest.remb_path.empty()) {
        ds.embeddings = read_remb(manifest.remb_path);
        for (const auto& [id, m] : ds.embeddings) {
            if (m.dim != manifest.embed_dim) {
                throw DataError("dataset " + manifest.name + ": REMB width " +
                                std::to_string(m.dim) + " conflicts with manifest d = " +
                                std::to_string(manifest.embed_dim));
            }
            auto it = ds.sequences.find(id);
            if (it != ds.sequences.end() &&
                static_cast<int>(it->second.length()) != m.rows) {
                throw DataError("dataset " + manifest.name + ": embedding rows for '" + id +
                                "' do not match its sequence length");
            }
        }
        for (const auto& [id, seq] : ds.sequences) {
            if (ds.embeddings.count(id) == 0) {
                throw DataError("dataset " + manifest.name + ": no residue embedding for '" + id +
                                "'");
            }
        }
    } else {
        for (const auto& [id, seq] : ds.sequences) {
            ds.embeddings.emplace(
                id, toy_residue_embedder(seq, manifest.embed_dim, manifest.embedder_seed));
        }
    }
    return ds;
}

// Declared in sequence.hpp; the container format lives here.
EmbeddingMap load_residue_embeddings(const std::string& path) { return read_remb(path); }

}  // namespace scmppi
