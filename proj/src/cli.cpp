#include "scmppi/cli.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "scmppi/errors.hpp"
#include "scmppi/io.hpp"
#include "scmppi/log.hpp"
#include "scmppi/rng.hpp"
#include "scmppi/synthetic.hpp"
#include "scmppi/training.hpp"

namespace fs = std::filesystem;

namespace scmppi {

namespace {

struct CommonArgs {
    std::string config_path;
    std::string manifest_path;
    std::string out_path;
    std::uint64_t seed = 0;
    bool seed_set = false;
};

void add_common(CLI::App* cmd, CommonArgs& args, bool with_manifest = true) {
    cmd->add_option("--config", args.config_path, "key=value pipeline configuration file");
    cmd->add_option("--seed", args.seed, "override the configured seed")
        ->each([&args](const std::string&) { args.seed_set = true; });
    cmd->add_option("--out", args.out_path, "output file or directory")->required();
    if (with_manifest) {
        cmd->add_option("--manifest", args.manifest_path, "dataset manifest")->required();
    }
}

PipelineConfig resolve_config(const CommonArgs& args) {
    PipelineConfig cfg;
    if (!args.config_path.empty()) cfg = load_config_file(args.config_path);
    if (args.seed_set) cfg.seed = args.seed;
    return cfg;
}

// Align configured featurization with what the dataset declares.
void adopt_manifest(PipelineConfig& cfg, const DatasetManifest& m, bool config_given) {
    cfg.encoder.embed_dim = m.embed_dim;
    if (!config_given) cfg.encoder.k = m.k;
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path);
    return out;
}

void write_metric_tsv(const std::string& path, const MetricReport& report) {
    auto out = open_out(path);
    const auto& names = metric_names();
    for (std::size_t i = 0; i < names.size(); ++i) out << (i ? "\t" : "") << names[i];
    out << '\n';
    const auto values = metric_values(report);
    for (std::size_t i = 0; i < values.size(); ++i) {
        out << (i ? "\t" : "") << format_double(values[i]);
    }
    out << '\n';
}

void print_metric_summary(const MetricReport& report) {
    const auto& names = metric_names();
    const auto values = metric_values(report);
    for (std::size_t i = 0; i < names.size(); ++i) {
        std::cout << names[i] << '\t' << format_double(values[i]) << '\n';
    }
}

void write_epoch_log(const std::string& path, const std::vector<EpochRow>& log) {
    auto out = open_out(path);
    out << "epoch\ttrain_loss\tbce\tpsup\tfiltered_negatives\tval_mcc\n";
    for (const auto& row : log) {
        out << row.epoch << '\t' << format_double(row.train_loss) << '\t'
            << format_double(row.bce) << '\t' << format_double(row.psup) << '\t'
            << row.filtered_negatives << '\t' << format_double(row.val_mcc) << '\n';
    }
}

struct LoadedModel {
    TrainedModel model;
    NodeEmbeddingTable table;
};

// --model accepts either a checkpoint file or a training output directory
// (model.ckpt plus node_table.tsv). Without a stored table the node
// embeddings are recomputed from the manifest graph, which is deterministic
// for a fixed config.
LoadedModel load_model_with_table(const std::string& model_path, const std::string& table_path,
                                  const Dataset& ds) {
    LoadedModel out;
    std::string ckpt = model_path;
    std::string table = table_path;
    if (fs::is_directory(model_path)) {
        ckpt = (fs::path(model_path) / "model.ckpt").string();
        if (table.empty()) {
            const std::string sibling = (fs::path(model_path) / "node_table.tsv").string();
            if (fs::exists(sibling)) table = sibling;
        }
    }
    out.model = load_checkpoint(ckpt);
    if (out.model.config.graph_on) {
        if (!table.empty()) {
            out.table = read_embedding_tsv(table);
        } else {
            log::info("no node table next to the checkpoint; recomputing node2vec embeddings");
            out.table =
                node2vec_embeddings(ds.graph, out.model.config.node2vec, out.model.config.seed);
        }
    }
    return out;
}

int cmd_featurize(const CommonArgs& args) {
    PipelineConfig cfg = resolve_config(args);
    const DatasetManifest manifest = load_manifest(args.manifest_path);
    adopt_manifest(cfg, manifest, !args.config_path.empty());
    const Dataset ds = load_dataset(manifest, cfg);
    auto out = open_out(args.out_path);
    out << "id\tlength";
    for (int i = 0; i < 20; ++i) out << "\taac_" << kAminoAlphabet[i];
    out << "\tdpc_nonzero\tcksaap_nonzero\tcksaap_mean_abs\n";
    for (const auto& [id, seq] : ds.sequences) {
        const auto& emb = ds.embeddings.at(id);
        const SeqFeatureBundle bundle = featurize_bundle(seq, emb, cfg.encoder.k);
        out << id << '\t' << seq.length();
        for (float v : bundle.aac) out << '\t' << format_double(static_cast<double>(v));
        std::int64_t dpc_nz = 0;
        for (float v : bundle.dpc) dpc_nz += v != 0.0f;
        std::int64_t ck_nz = 0;
        double ck_abs = 0.0;
        for (float v : bundle.cksaap.data) {
            ck_nz += v != 0.0f;
            ck_abs += std::abs(static_cast<double>(v));
        }
        out << '\t' << dpc_nz << '\t' << ck_nz << '\t'
            << format_double(ck_abs / static_cast<double>(bundle.cksaap.data.size())) << '\n';
    }
    return 0;
}

int cmd_node2vec(const CommonArgs& args, const std::string& exclude_pairs) {
    PipelineConfig cfg = resolve_config(args);
    const DatasetManifest manifest = load_manifest(args.manifest_path);
    adopt_manifest(cfg, manifest, !args.config_path.empty());
    PpiGraph graph = parse_edges(manifest.edges_path).graph;
    if (!exclude_pairs.empty()) {
        auto removal = remove_leakage_edges(graph, parse_pair_list(exclude_pairs));
        log::info("removed " + std::to_string(removal.removed_edges) + " leakage edge(s)");
        graph = std::move(removal.graph);
    }
    const auto table = node2vec_embeddings(graph, cfg.node2vec, cfg.seed);
    write_embedding_tsv(args.out_path, table);
    return 0;
}

int cmd_train(const CommonArgs& args) {
    PipelineConfig cfg = resolve_config(args);
    const DatasetManifest manifest = load_manifest(args.manifest_path);
    adopt_manifest(cfg, manifest, !args.config_path.empty());
    const Dataset ds = load_dataset(manifest, cfg);
    const TrainResult result = train(ds.pairs, ds.sequences, ds.embeddings, ds.graph, cfg);
    fs::create_directories(args.out_path);
    save_checkpoint((fs::path(args.out_path) / "model.ckpt").string(), result.model);
    if (cfg.graph_on) {
        write_embedding_tsv((fs::path(args.out_path) / "node_table.tsv").string(),
                            result.node_table);
    }
    write_epoch_log((fs::path(args.out_path) / "epochs.tsv").string(), result.log);
    std::cout << "best epoch " << result.model.best_epoch << ", validation mcc "
              << format_double(result.model.best_val_mcc) << '\n';
    return 0;
}

int cmd_crossval(const CommonArgs& args, int folds) {
    PipelineConfig cfg = resolve_config(args);
    const DatasetManifest manifest = load_manifest(args.manifest_path);
    adopt_manifest(cfg, manifest, !args.config_path.empty());
    const Dataset ds = load_dataset(manifest, cfg);
    const CrossvalOutcome outcome = crossval(ds, cfg, folds);

    fs::create_directories(args.out_path);
    const auto& names = metric_names();
    auto out = open_out((fs::path(args.out_path) / "cv.tsv").string());
    out << "fold";
    for (const auto& n : names) out << '\t' << n;
    out << '\n';
    for (const auto& fold : outcome.folds) {
        out << fold.fold;
        for (double v : metric_values(fold.metrics)) out << '\t' << format_double(v);
        out << '\n';
    }
    out << "mean";
    for (double v : outcome.mean) out << '\t' << format_double(v);
    out << "\nstd";
    for (double v : outcome.stdev) out << '\t' << format_double(v);
    out << '\n';

    for (const auto& fold : outcome.folds) {
        const fs::path fold_dir = fs::path(args.out_path) / ("fold" + std::to_string(fold.fold));
        fs::create_directories(fold_dir);
        save_checkpoint((fold_dir / "model.ckpt").string(), fold.result.model);
        if (cfg.graph_on) {
            write_embedding_tsv((fold_dir / "node_table.tsv").string(), fold.result.node_table);
        }
        write_epoch_log((fold_dir / "epochs.tsv").string(), fold.result.log);
        auto tp = open_out((fold_dir / "test_pairs.tsv").string());
        for (std::size_t idx : fold.test_indices) {
            tp << ds.pairs[idx].id_a << '\t' << ds.pairs[idx].id_b << '\t' << ds.pairs[idx].label
               << '\n';
        }
    }
    return 0;
}

int cmd_evaluate(const CommonArgs& args, const std::string& model_path,
                 const std::string& table_path, const std::string& pairs_path) {
    PipelineConfig cfg = resolve_config(args);
    const DatasetManifest manifest = load_manifest(args.manifest_path);
    adopt_manifest(cfg, manifest, !args.config_path.empty());
    const Dataset ds = load_dataset(manifest, cfg);
    const LoadedModel lm = load_model_with_table(model_path, table_path, ds);
    std::vector<PairSample> pairs = ds.pairs;
    if (!pairs_path.empty()) pairs = parse_pairs(pairs_path).pairs;
    std::vector<std::pair<std::string, std::string>> ids;
    std::vector<int> labels;
    for (const auto& p : pairs) {
        ids.emplace_back(p.id_a, p.id_b);
        labels.push_back(p.label);
    }
    const auto scores = predict_scores(lm.model, ids, ds.sequences, ds.embeddings, lm.table);
    const MetricReport report = full_metrics(scores, labels);
    write_metric_tsv(args.out_path, report);
    print_metric_summary(report);
    return 0;
}

int cmd_predict(const CommonArgs& args, const std::string& model_path,
                const std::string& table_path, const std::string& pairs_path) {
    PipelineConfig cfg = resolve_config(args);
    const DatasetManifest manifest = load_manifest(args.manifest_path);
    adopt_manifest(cfg, manifest, !args.config_path.empty());
    const Dataset ds = load_dataset(manifest, cfg);
    const LoadedModel lm = load_model_with_table(model_path, table_path, ds);
    const auto pairs = parse_pair_list(pairs_path);
    const auto scores = predict_scores(lm.model, pairs, ds.sequences, ds.embeddings, lm.table);
    auto out = open_out(args.out_path);
    out << "id_a\tid_b\tscore\tlabel\n";
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        out << pairs[i].first << '\t' << pairs[i].second << '\t' << format_double(scores[i])
            << '\t' << (scores[i] >= 0.5 ? 1 : 0) << '\n';
    }
    return 0;
}

int cmd_export_projections(const CommonArgs& args, const std::string& model_path,
                           const std::string& table_path) {
    PipelineConfig cfg = resolve_config(args);
    const DatasetManifest manifest = load_manifest(args.manifest_path);
    adopt_manifest(cfg, manifest, !args.config_path.empty());
    const Dataset ds = load_dataset(manifest, cfg);
    const LoadedModel lm = load_model_with_table(model_path, table_path, ds);
    const auto rows = export_projections(lm.model, ds.sequences, ds.embeddings, lm.table);
    auto out = open_out(args.out_path);
    for (const auto& [id, z] : rows) {
        out << id;
        for (float v : z) out << '\t' << format_double(static_cast<double>(v));
        out << '\n';
    }
    return 0;
}

int cmd_synth(const CommonArgs& args, SynthConfig synth) {
    if (args.seed_set) synth.seed = args.seed;
    generate_synthetic(synth, args.out_path);
    std::cout << "wrote synthetic dataset to " << args.out_path << '\n';
    return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
    CLI::App app{"Multimodal protein-protein interaction prediction pipeline"};
    app.require_subcommand(1);

    CommonArgs featurize_args;
    auto* featurize = app.add_subcommand("featurize", "emit per-protein feature statistics");
    add_common(featurize, featurize_args);

    CommonArgs node2vec_args;
    std::string exclude_pairs;
    auto* node2vec = app.add_subcommand("node2vec", "emit node-embedding TSV for the graph");
    add_common(node2vec, node2vec_args);
    node2vec->add_option("--exclude-pairs", exclude_pairs,
                         "pair list whose edges are removed before embedding");

    CommonArgs train_args;
    auto* train_cmd = app.add_subcommand("train", "train a model on the manifest pairs");
    add_common(train_cmd, train_args);

    CommonArgs crossval_args;
    int folds = 5;
    auto* crossval_cmd = app.add_subcommand("crossval", "stratified k-fold cross-validation");
    add_common(crossval_cmd, crossval_args);
    crossval_cmd->add_option("--folds", folds, "number of folds")->default_val(5);

    CommonArgs evaluate_args;
    std::string eval_model, eval_table, eval_pairs;
    auto* evaluate_cmd = app.add_subcommand("evaluate", "score labeled pairs and report metrics");
    add_common(evaluate_cmd, evaluate_args);
    evaluate_cmd->add_option("--model", eval_model, "checkpoint file or train output directory")
        ->required();
    evaluate_cmd->add_option("--node-table", eval_table, "node-embedding TSV");
    evaluate_cmd->add_option("--pairs", eval_pairs, "labeled pairs to score (default: manifest)");

    CommonArgs predict_args;
    std::string pred_model, pred_table, pred_pairs;
    auto* predict_cmd = app.add_subcommand("predict", "score a pair list");
    add_common(predict_cmd, predict_args);
    predict_cmd->add_option("--model", pred_model, "checkpoint file or train output directory")
        ->required();
    predict_cmd->add_option("--node-table", pred_table, "node-embedding TSV");
    predict_cmd->add_option("--pairs", pred_pairs, "pair list (id_a<TAB>id_b)")->required();

    CommonArgs proj_args;
    std::string proj_model, proj_table;
    auto* proj_cmd =
        app.add_subcommand("export-projections", "emit per-protein unit-norm projections");
    add_common(proj_cmd, proj_args);
    proj_cmd->add_option("--model", proj_model, "checkpoint file or train output directory")
        ->required();
    proj_cmd->add_option("--node-table", proj_table, "node-embedding TSV");

    CommonArgs synth_args;
    SynthConfig synth;
    auto* synth_cmd = app.add_subcommand("synth", "generate a planted-community dataset");
    add_common(synth_cmd, synth_args, /*with_manifest=*/false);
    synth_cmd->add_option("--communities", synth.communities)->default_val(2);
    synth_cmd->add_option("--per-community", synth.proteins_per_community)->default_val(50);
    synth_cmd->add_option("--pairs", synth.pair_count)->default_val(400);
    synth_cmd->add_option("--seq-len-min", synth.seq_len_min)->default_val(60);
    synth_cmd->add_option("--seq-len-max", synth.seq_len_max)->default_val(100);
    synth_cmd->add_option("--signal", synth.signal)->default_val(1.0);
    synth_cmd->add_option("--d", synth.embed_dim)->default_val(32);
    synth_cmd->add_option("--k", synth.k)->default_val(1);
    synth_cmd->add_option("--name", synth.name)->default_val("synth");

    std::vector<std::string> argv_storage;
    argv_storage.reserve(args.size() + 1);
    argv_storage.push_back("scmppi");
    for (const auto& a : args) argv_storage.push_back(a);
    std::vector<const char*> argv;
    for (const auto& a : argv_storage) argv.push_back(a.c_str());

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp& e) {
        std::cout << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << '\n' << app.help();
        return 1;
    }

    try {
        if (featurize->parsed()) return cmd_featurize(featurize_args);
        if (node2vec->parsed()) return cmd_node2vec(node2vec_args, exclude_pairs);
        if (train_cmd->parsed()) return cmd_train(train_args);
        if (crossval_cmd->parsed()) return cmd_crossval(crossval_args, folds);
        if (evaluate_cmd->parsed()) {
            return cmd_evaluate(evaluate_args, eval_model, eval_table, eval_pairs);
        }
        if (predict_cmd->parsed()) return cmd_predict(predict_args, pred_model, pred_table, pred_pairs);
        if (proj_cmd->parsed()) return cmd_export_projections(proj_args, proj_model, proj_table);
        if (synth_cmd->parsed()) return cmd_synth(synth_args, synth);
        std::cerr << app.help();
        return 1;
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return 1;
    } catch (const NumericError& e) {
        std::cerr << "numeric failure: " << e.what() << '\n';
        return 3;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return 2;
    }
}

}  // namespace scmppi
