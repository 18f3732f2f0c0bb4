// SPDX-License-Identifier: Apache-2.0
//
// Pipeline driver: synth -> extract -> split -> augment -> train -> eval,
// plus infer / timeline / schema utilities. Every stage writes a manifest
// next to its outputs and is deterministic given its seeds.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "acpt/augment.hpp"
#include "acpt/dataset.hpp"
#include "acpt/eval.hpp"
#include "acpt/manifest.hpp"
#include "acpt/match_io.hpp"
#include "acpt/synthgen.hpp"
#include "acpt/toml.hpp"
#include "acpt/train.hpp"
#include "acpt/version.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Timer {
    std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
    double ms() const {
        return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
            .count();
    }
};

fs::path parent_dir(const fs::path& p) {
    const fs::path d = p.parent_path();
    return d.empty() ? fs::path(".") : d;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw acpt::ValidationError("cannot write " + path.string());
    out << text;
}

// ---------------------------------------------------------------------------
// synth
// ---------------------------------------------------------------------------

int cmd_synth(const std::string& out_dir, int matches, double cheater_fraction,
              int kills_per_attacker, std::uint64_t seed) {
    Timer timer;
    const auto corpus = acpt::generate_corpus(seed, matches, cheater_fraction, kills_per_attacker);
    fs::create_directories(out_dir);
    acpt::RunManifest m;
    m.command = "synth";
    m.config = {{"matches", matches},
                {"cheater_fraction", cheater_fraction},
                {"kills_per_attacker", kills_per_attacker},
                {"seed", seed}};
    m.seeds = {seed};
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        char name[32];
        std::snprintf(name, sizeof(name), "match_%04zu", i);
        const fs::path stem = fs::path(out_dir) / name;
        acpt::save_match(corpus[i], stem);
        for (const char* suffix : {".ticks.csv", ".events.jsonl"}) {
            const fs::path p = stem.string() + suffix;
            m.outputs.emplace_back(p.string(), acpt::file_crc32(p));
        }
    }
    m.wall_ms = timer.ms();
    acpt::write_manifest(out_dir, m);
    std::printf("synth: %d matches -> %s\n", matches, out_dir.c_str());
    return 0;
}

// ---------------------------------------------------------------------------
// extract
// ---------------------------------------------------------------------------

int cmd_extract(const std::string& in_dir, const std::string& out_file) {
    Timer timer;
    const auto& schema = acpt::FeatureSchema::standard();
    const auto stems = acpt::list_match_stems(in_dir);
    if (stems.empty()) throw acpt::ValidationError("no match files under " + in_dir);

    acpt::WindowSet all;
    all.schema_hash = schema.content_hash();
    acpt::RunManifest m;
    m.command = "extract";
    m.config = {{"in", in_dir}, {"out", out_file}};
    for (const auto& stem : stems) {
        const acpt::MatchRecord match = acpt::load_match(stem);
        acpt::WindowSet ws = acpt::extract_all(match, schema);
        for (auto& w : ws.windows) all.add(std::move(w));
        m.inputs.emplace_back(stem + std::string(acpt::kEventsSuffix),
                              acpt::file_crc32(stem + std::string(acpt::kEventsSuffix)));
    }
    acpt::save_dataset(all, out_file);
    m.outputs.emplace_back(out_file, acpt::file_crc32(out_file));
    m.wall_ms = timer.ms();
    acpt::write_manifest(parent_dir(out_file), m);
    std::printf("extract: %zu windows (%lld cheater, %lld legit) -> %s\n", all.size(),
                static_cast<long long>(all.label_counts[1]),
                static_cast<long long>(all.label_counts[0]), out_file.c_str());
    return 0;
}

// ---------------------------------------------------------------------------
// split
// ---------------------------------------------------------------------------

int cmd_split(const std::string& in_file, const std::string& out_dir, acpt::SplitSpec spec) {
    Timer timer;
    const acpt::WindowSet ws = acpt::load_dataset(in_file);
    const acpt::SplitResult split = acpt::split_by_match(ws, spec);
    fs::create_directories(out_dir);
    acpt::RunManifest m;
    m.command = "split";
    m.config = {{"train", spec.train}, {"val", spec.val}, {"test", spec.test}, {"seed", spec.seed}};
    m.seeds = {spec.seed};
    m.inputs.emplace_back(in_file, acpt::file_crc32(in_file));
    const std::pair<const char*, const acpt::WindowSet*> parts[] = {
        {"train.acpt", &split.train}, {"val.acpt", &split.val}, {"test.acpt", &split.test}};
    for (const auto& [name, set] : parts) {
        const fs::path p = fs::path(out_dir) / name;
        acpt::save_dataset(*set, p);
        m.outputs.emplace_back(p.string(), acpt::file_crc32(p));
        std::printf("split: %s %zu windows (%lld cheater)\n", name, set->size(),
                    static_cast<long long>(set->label_counts[1]));
    }
    m.wall_ms = timer.ms();
    acpt::write_manifest(out_dir, m);
    return 0;
}

// ---------------------------------------------------------------------------
// augment
// ---------------------------------------------------------------------------

int cmd_augment(const std::string& in_file, const std::string& out_file, acpt::AugmentConfig cfg) {
    Timer timer;
    const acpt::WindowSet ws = acpt::load_dataset(in_file);
    const acpt::WindowSet out = acpt::augment_dataset(ws, cfg);
    acpt::save_dataset(out, out_file);
    acpt::RunManifest m;
    m.command = "augment";
    m.config = {{"sigma", cfg.sigma},
                {"cheater_copies", cfg.cheater_copies},
                {"noncheater_copies", cfg.noncheater_copies},
                {"seed", cfg.seed}};
    m.seeds = {cfg.seed};
    m.inputs.emplace_back(in_file, acpt::file_crc32(in_file));
    m.outputs.emplace_back(out_file, acpt::file_crc32(out_file));
    m.wall_ms = timer.ms();
    acpt::write_manifest(parent_dir(out_file), m);
    std::printf("augment: %zu -> %zu windows -> %s\n", ws.size(), out.size(), out_file.c_str());
    return 0;
}

// ---------------------------------------------------------------------------
// train
// ---------------------------------------------------------------------------

void apply_train_toml(const acpt::TomlTable& t, acpt::TrainConfig& cfg) {
    if (t.contains("train.batch_size")) cfg.batch_size = static_cast<int>(t.get_int("train.batch_size"));
    if (t.contains("train.base_lr")) cfg.schedule.base_lr = t.get_double("train.base_lr");
    if (t.contains("train.gamma")) cfg.schedule.gamma = t.get_double("train.gamma");
    if (t.contains("train.step_size")) cfg.schedule.step_size = static_cast<int>(t.get_int("train.step_size"));
    if (t.contains("train.seed")) cfg.seed = static_cast<std::uint64_t>(t.get_int("train.seed"));
    if (t.contains("train.max_epochs")) cfg.max_epochs = static_cast<int>(t.get_int("train.max_epochs"));
    if (t.contains("train.patience")) cfg.patience = static_cast<int>(t.get_int("train.patience"));
    if (t.contains("train.threshold")) cfg.eval_threshold = t.get_double("train.threshold");
    if (t.contains("train.weight_decay")) cfg.optimizer.weight_decay = t.get_double("train.weight_decay");
    if (t.contains("model.window_rows")) cfg.model.window_rows = static_cast<int>(t.get_int("model.window_rows"));
    if (t.contains("model.dropout")) cfg.model.dropout = t.get_double("model.dropout");
}

int cmd_train(const std::string& train_file, const std::string& val_file,
              const std::string& out_dir, const acpt::TrainConfig& cfg) {
    Timer timer;
    acpt::WindowSet train_ws = acpt::load_dataset(train_file);
    acpt::WindowSet val_ws = acpt::load_dataset(val_file);
    if (train_ws.empty()) throw acpt::ValidationError("train set is empty");

    acpt::TrainConfig effective = cfg;
    effective.model.window_rows = train_ws.windows.front().rows;

    const acpt::TrainResult result =
        acpt::train(effective, train_ws, val_ws, [](const acpt::EpochStats& e) {
            std::printf("epoch %d: train_loss=%.6f val_loss=%.6f val_acc=%.4f val_auc=%.4f lr=%g\n",
                        e.epoch, e.train_loss, e.val.loss, e.val.accuracy, e.val.auc, e.lr);
            std::fflush(stdout);
        });

    fs::create_directories(out_dir);
    const fs::path ckpt = fs::path(out_dir) / "best.ckpt";
    acpt::save_checkpoint(result.best, ckpt);
    const fs::path hist = fs::path(out_dir) / "history.csv";
    write_text(hist, acpt::history_csv(result.history));

    acpt::RunManifest m;
    m.command = "train";
    m.config = effective.to_json();
    m.seeds = {effective.seed};
    m.inputs.emplace_back(train_file, acpt::file_crc32(train_file));
    m.inputs.emplace_back(val_file, acpt::file_crc32(val_file));
    m.outputs.emplace_back(ckpt.string(), acpt::file_crc32(ckpt));
    m.outputs.emplace_back(hist.string(), acpt::file_crc32(hist));
    m.wall_ms = timer.ms();
    acpt::write_manifest(out_dir, m);
    std::printf("train: best epoch %d (val_loss=%.6f) -> %s\n", result.best_epoch,
                result.best.val.loss, ckpt.string().c_str());
    return 0;
}

// ---------------------------------------------------------------------------
// eval / infer / timeline
// ---------------------------------------------------------------------------

int cmd_eval(const std::string& ckpt_file, const std::string& data_file, double threshold,
             const std::string& out_file, const std::string& roc_file) {
    Timer timer;
    const acpt::Checkpoint ckpt =
        acpt::load_checkpoint(ckpt_file, acpt::FeatureSchema::standard().content_hash());
    const acpt::WindowSet ws = acpt::load_dataset(data_file);
    acpt::require_unaugmented(ws, "eval");
    const acpt::EvalReport report = acpt::evaluate(ckpt.params, ws, threshold);
    const std::string text = report.to_json().dump(2);
    std::printf("%s\n", text.c_str());
    if (!out_file.empty()) {
        write_text(out_file, text + "\n");
        acpt::RunManifest m;
        m.command = "eval";
        m.config = {{"threshold", threshold}};
        m.inputs = {{ckpt_file, acpt::file_crc32(ckpt_file)},
                    {data_file, acpt::file_crc32(data_file)}};
        m.outputs = {{out_file, acpt::file_crc32(out_file)}};
        m.wall_ms = timer.ms();
        acpt::write_manifest(parent_dir(out_file), m);
    }
    if (!roc_file.empty()) write_text(roc_file, acpt::roc_csv(report.roc));
    return 0;
}

int cmd_infer(const std::string& ckpt_file, const std::string& data_file,
              const std::string& match_stem, std::int64_t index) {
    const acpt::Checkpoint ckpt =
        acpt::load_checkpoint(ckpt_file, acpt::FeatureSchema::standard().content_hash());
    acpt::WindowSet ws;
    if (!data_file.empty()) {
        ws = acpt::load_dataset(data_file);
        if (index >= 0) {
            if (static_cast<std::size_t>(index) >= ws.size()) {
                throw acpt::ValidationError("infer: window index out of range");
            }
            acpt::WindowSet one;
            one.schema_hash = ws.schema_hash;
            one.add(ws.windows[static_cast<std::size_t>(index)]);
            ws = std::move(one);
        }
    } else {
        const acpt::MatchRecord match = acpt::load_match(match_stem);
        ws = acpt::extract_all(match, acpt::FeatureSchema::standard());
        if (ws.empty()) throw acpt::ValidationError("infer: match has no scorable kills");
    }
    const std::vector<float> logits = acpt::score_logits(ckpt.params, ws);
    // The sigmoid lives outside the model; both raw logit and probability are
    // reported.
    std::printf("index,match_id,kill_tick,attacker_id,logit,probability\n");
    for (std::size_t i = 0; i < logits.size(); ++i) {
        const auto& w = ws.windows[i];
        std::printf("%zu,%s,%lld,%s,%.6f,%.6f\n", i, w.match_id.c_str(),
                    static_cast<long long>(w.kill_tick), w.attacker_id.c_str(),
                    static_cast<double>(logits[i]), acpt::sigmoid(logits[i]));
    }
    return 0;
}

int cmd_timeline(const std::string& ckpt_file, const std::string& match_stem,
                 const std::string& player, const std::string& out_file) {
    const acpt::Checkpoint ckpt =
        acpt::load_checkpoint(ckpt_file, acpt::FeatureSchema::standard().content_hash());
    const acpt::MatchRecord match = acpt::load_match(match_stem);
    const acpt::KillTimeline t =
        acpt::player_timeline(ckpt.params, match, player, acpt::FeatureSchema::standard());
    const std::string csv = acpt::timeline_csv(t);
    if (out_file.empty()) {
        std::printf("%s", csv.c_str());
    } else {
        write_text(out_file, csv);
    }
    std::fprintf(stderr, "timeline: %s mean probability %.6f over %zu kills\n", player.c_str(),
                 t.mean_probability, t.entries.size());
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"behavioral cheat-detection pipeline over tick-based match telemetry"};
    app.set_version_flag("--version", acpt::kVersion);
    app.require_subcommand(1);
    unsigned threads = 0;
    app.add_option("--threads", threads, "worker threads (0 = hardware)")->capture_default_str();

    // synth
    auto* synth = app.add_subcommand("synth", "generate a synthetic match corpus");
    std::string synth_out = "matches";
    int synth_matches = 60;
    double synth_fraction = 0.4;
    int synth_kills = 4;
    std::uint64_t synth_seed = 7;
    synth->add_option("--out", synth_out, "output directory")->capture_default_str();
    synth->add_option("--matches", synth_matches)->capture_default_str();
    synth->add_option("--cheater-fraction", synth_fraction)->capture_default_str();
    synth->add_option("--kills-per-attacker", synth_kills)->capture_default_str();
    synth->add_option("--seed", synth_seed)->capture_default_str();

    // extract
    auto* extract = app.add_subcommand("extract", "matches -> window dataset");
    std::string extract_in, extract_out = "windows.acpt";
    extract->add_option("--in", extract_in, "match directory")->required();
    extract->add_option("--out", extract_out)->capture_default_str();

    // split
    auto* split = app.add_subcommand("split", "match-keyed train/val/test split");
    std::string split_in, split_out = "splits";
    acpt::SplitSpec split_spec;
    split->add_option("--in", split_in)->required();
    split->add_option("--out", split_out, "output directory")->capture_default_str();
    split->add_option("--train", split_spec.train)->capture_default_str();
    split->add_option("--val", split_spec.val)->capture_default_str();
    split->add_option("--test", split_spec.test)->capture_default_str();
    split->add_option("--seed", split_spec.seed)->capture_default_str();

    // augment
    auto* augment = app.add_subcommand("augment", "class-dependent Gaussian coordinate augmentation");
    std::string aug_in, aug_out = "augmented.acpt";
    acpt::AugmentConfig aug_cfg;
    augment->add_option("--in", aug_in)->required();
    augment->add_option("--out", aug_out)->capture_default_str();
    augment->add_option("--sigma", aug_cfg.sigma)->capture_default_str();
    augment->add_option("--cheater-copies", aug_cfg.cheater_copies)->capture_default_str();
    augment->add_option("--noncheater-copies", aug_cfg.noncheater_copies)->capture_default_str();
    augment->add_option("--seed", aug_cfg.seed)->capture_default_str();

    // train
    auto* train = app.add_subcommand("train", "train the encoder classifier");
    std::string train_in, val_in, train_out = "run", config_file;
    acpt::TrainConfig train_cfg;
    train->add_option("--train", train_in)->required();
    train->add_option("--val", val_in)->required();
    train->add_option("--out", train_out, "output directory")->capture_default_str();
    train->add_option("--config", config_file, "TOML config (flags override file values)");
    auto* opt_bs = train->add_option("--batch-size", train_cfg.batch_size);
    auto* opt_lr = train->add_option("--lr", train_cfg.schedule.base_lr);
    auto* opt_gamma = train->add_option("--gamma", train_cfg.schedule.gamma);
    auto* opt_step = train->add_option("--step-size", train_cfg.schedule.step_size);
    auto* opt_seed = train->add_option("--seed", train_cfg.seed);
    auto* opt_epochs = train->add_option("--max-epochs", train_cfg.max_epochs);
    auto* opt_patience = train->add_option("--patience", train_cfg.patience);
    auto* opt_thresh = train->add_option("--threshold", train_cfg.eval_threshold);

    // eval
    auto* eval = app.add_subcommand("eval", "evaluate a checkpoint on a dataset");
    std::string eval_ckpt, eval_data, eval_out, eval_roc;
    double eval_threshold = 0.7;
    eval->add_option("--checkpoint", eval_ckpt)->required();
    eval->add_option("--data", eval_data)->required();
    eval->add_option("--threshold", eval_threshold)->capture_default_str();
    eval->add_option("--out", eval_out, "write the JSON report here");
    eval->add_option("--roc", eval_roc, "write ROC points CSV here");

    // infer
    auto* infer = app.add_subcommand("infer", "score windows from a dataset or a match");
    std::string infer_ckpt, infer_data, infer_match;
    std::int64_t infer_index = -1;
    infer->add_option("--checkpoint", infer_ckpt)->required();
    auto* infer_data_opt = infer->add_option("--data", infer_data, "window dataset file");
    auto* infer_match_opt = infer->add_option("--match", infer_match, "match stem or events file");
    infer->add_option("--index", infer_index, "score a single window of --data");
    infer_data_opt->excludes(infer_match_opt);

    // timeline
    auto* timeline = app.add_subcommand("timeline", "per-player kill probability timeline CSV");
    std::string tl_ckpt, tl_match, tl_player, tl_out;
    timeline->add_option("--checkpoint", tl_ckpt)->required();
    timeline->add_option("--match", tl_match)->required();
    timeline->add_option("--player", tl_player)->required();
    timeline->add_option("--out", tl_out, "write CSV here (default: stdout)");

    // schema
    auto* schema_cmd = app.add_subcommand("schema", "print the feature schema JSON document");
    std::string schema_out;
    schema_cmd->add_option("--out", schema_out, "write the schema here (default: stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        (void)app.exit(e); // prints usage to stderr
        return 1;
    }

    try {
        acpt::set_thread_count(threads);
        if (*synth) {
            return cmd_synth(synth_out, synth_matches, synth_fraction, synth_kills, synth_seed);
        }
        if (*extract) return cmd_extract(extract_in, extract_out);
        if (*split) return cmd_split(split_in, split_out, split_spec);
        if (*augment) return cmd_augment(aug_in, aug_out, aug_cfg);
        if (*train) {
            acpt::TrainConfig cfg; // defaults
            if (!config_file.empty()) {
                apply_train_toml(acpt::TomlTable::parse_file(config_file), cfg);
            }
            // Flags given on the command line override the file.
            if (opt_bs->count()) cfg.batch_size = train_cfg.batch_size;
            if (opt_lr->count()) cfg.schedule.base_lr = train_cfg.schedule.base_lr;
            if (opt_gamma->count()) cfg.schedule.gamma = train_cfg.schedule.gamma;
            if (opt_step->count()) cfg.schedule.step_size = train_cfg.schedule.step_size;
            if (opt_seed->count()) cfg.seed = train_cfg.seed;
            if (opt_epochs->count()) cfg.max_epochs = train_cfg.max_epochs;
            if (opt_patience->count()) cfg.patience = train_cfg.patience;
            if (opt_thresh->count()) cfg.eval_threshold = train_cfg.eval_threshold;
            return cmd_train(train_in, val_in, train_out, cfg);
        }
        if (*eval) return cmd_eval(eval_ckpt, eval_data, eval_threshold, eval_out, eval_roc);
        if (*infer) {
            if (infer_data.empty() && infer_match.empty()) {
                std::fprintf(stderr, "infer: need --data or --match\n");
                return 1;
            }
            return cmd_infer(infer_ckpt, infer_data, infer_match, infer_index);
        }
        if (*timeline) return cmd_timeline(tl_ckpt, tl_match, tl_player, tl_out);
        if (*schema_cmd) {
            const std::string text = acpt::FeatureSchema::standard().to_json().dump(2);
            if (schema_out.empty()) {
                std::printf("%s\n", text.c_str());
            } else {
                write_text(schema_out, text + "\n");
            }
            return 0;
        }
    } catch (const acpt::NumericError& e) {
        std::fprintf(stderr, "numeric error: %s\n", e.what());
        return 3;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 1;
}
