// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "acpt/binio.hpp"
#include "acpt/common.hpp"
#include "acpt/dataset.hpp"
#include "acpt/eval.hpp"
#include "acpt/loss.hpp"
#include "acpt/model.hpp"
#include "acpt/optimizer.hpp"

namespace acpt {

inline constexpr std::string_view kCheckpointMagic = "ACPTCKPT";
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct TrainConfig {
    int batch_size = 128;
    StepLRSchedule schedule;       // base 1e-4, gamma 0.5, step 10
    AdamWConfig optimizer;         // lr field superseded by the schedule
    std::uint64_t seed = 42;
    int max_epochs = 50;
    int patience = 5;              // early stop on validation loss
    double eval_threshold = 0.7;   // per-epoch validation metrics
    std::vector<std::string> monitor = {"loss", "accuracy", "auc"};
    ModelConfig model;

    void validate() const {
        if (batch_size < 1) throw ValidationError("train: batch_size must be >= 1");
        if (patience < 1) throw ValidationError("train: patience must be >= 1");
        if (max_epochs < 1) throw ValidationError("train: max_epochs must be >= 1");
    }

    nlohmann::json to_json() const {
        return {{"batch_size", batch_size},
                {"base_lr", schedule.base_lr},
                {"gamma", schedule.gamma},
                {"step_size", schedule.step_size},
                {"beta1", optimizer.beta1},
                {"beta2", optimizer.beta2},
                {"eps", optimizer.eps},
                {"weight_decay", optimizer.weight_decay},
                {"seed", seed},
                {"max_epochs", max_epochs},
                {"patience", patience},
                {"eval_threshold", eval_threshold},
                {"monitor", monitor},
                {"model",
                 {{"d_model", model.d_model},
                  {"ff_dim", model.ff_dim},
                  {"n_layers", model.n_layers},
                  {"window_rows", model.window_rows},
                  {"head_hidden", model.head_hidden},
                  {"pe_scale", model.pe_scale},
                  {"ln_eps", model.ln_eps},
                  {"dropout", model.dropout}}}};
    }

    static TrainConfig from_json(const nlohmann::json& j) {
        TrainConfig c;
        c.batch_size = j.at("batch_size").get<int>();
        c.schedule.base_lr = j.at("base_lr").get<double>();
        c.schedule.gamma = j.at("gamma").get<double>();
        c.schedule.step_size = j.at("step_size").get<int>();
        c.optimizer.beta1 = j.at("beta1").get<double>();
        c.optimizer.beta2 = j.at("beta2").get<double>();
        c.optimizer.eps = j.at("eps").get<double>();
        c.optimizer.weight_decay = j.at("weight_decay").get<double>();
        c.seed = j.at("seed").get<std::uint64_t>();
        c.max_epochs = j.at("max_epochs").get<int>();
        c.patience = j.at("patience").get<int>();
        c.eval_threshold = j.at("eval_threshold").get<double>();
        c.monitor = j.at("monitor").get<std::vector<std::string>>();
        const auto& m = j.at("model");
        c.model.d_model = m.at("d_model").get<int>();
        c.model.ff_dim = m.at("ff_dim").get<int>();
        c.model.n_layers = m.at("n_layers").get<int>();
        c.model.window_rows = m.at("window_rows").get<int>();
        c.model.head_hidden = m.at("head_hidden").get<int>();
        c.model.pe_scale = m.at("pe_scale").get<double>();
        c.model.ln_eps = m.at("ln_eps").get<double>();
        c.model.dropout = m.at("dropout").get<double>();
        return c;
    }
};

struct ValSummary {
    double loss = 0;
    double accuracy = 0;
    double auc = std::numeric_limits<double>::quiet_NaN(); // NaN when not computed
    double precision = 0, recall = 0, f1 = 0, specificity = 0;
};

struct EpochStats {
    int epoch = 0; // 0-based
    double train_loss = 0;
    ValSummary val;
    double lr = 0;
};

struct Checkpoint {
    std::uint32_t version = kCheckpointVersion;
    std::uint64_t schema_hash = 0;
    TrainConfig cfg;
    ModelParams<float> params;
    AdamWState<float> opt;
    int scheduler_epoch = 0;
    int epoch = 0;
    double avg_train_loss = 0;
    ValSummary val;
};

struct TrainResult {
    Checkpoint best;
    std::vector<EpochStats> history;
    int best_epoch = 0;
};

// ---------------------------------------------------------------------------
// Checkpoint serialization: "ACPTCKPT" | u32 version | u32 json_len | json |
// u64 tensor_count | tensors (str16 name, u32 rows, u32 cols, f32 data) |
// u32 crc32. Tensor order: model tensors, then optimizer first moments
// ("opt.m.<name>"), then second moments ("opt.v.<name>").
// ---------------------------------------------------------------------------

inline void save_checkpoint(const Checkpoint& c, const std::filesystem::path& path) {
    BinWriter w;
    w.bytes(kCheckpointMagic);
    w.u32(c.version);

    nlohmann::json header = {
        {"schema_hash", c.schema_hash},
        {"config", c.cfg.to_json()},
        {"opt_step", c.opt.step},
        {"scheduler_epoch", c.scheduler_epoch},
        {"epoch", c.epoch},
        {"avg_train_loss", c.avg_train_loss},
        {"val",
         {{"loss", c.val.loss},
          {"accuracy", c.val.accuracy},
          {"auc", std::isnan(c.val.auc) ? nlohmann::json(nullptr) : nlohmann::json(c.val.auc)},
          {"precision", c.val.precision},
          {"recall", c.val.recall},
          {"f1", c.val.f1},
          {"specificity", c.val.specificity}}},
    };
    const std::string hj = header.dump();
    w.u32(static_cast<std::uint32_t>(hj.size()));
    w.bytes(hj);

    std::vector<std::pair<std::string, const Mat<float>*>> tensors;
    for_each_tensor(c.params, [&](const std::string& name, const Mat<float>& t) {
        tensors.emplace_back(name, &t);
    });
    {
        std::size_t i = 0;
        for_each_tensor(c.params, [&](const std::string& name, const Mat<float>&) {
            tensors.emplace_back("opt.m." + name, &c.opt.m[i]);
            tensors.emplace_back("opt.v." + name, &c.opt.v[i]);
            ++i;
        });
    }
    w.u64(tensors.size());
    for (const auto& [name, t] : tensors) {
        w.str16(name);
        w.u32(static_cast<std::uint32_t>(t->rows));
        w.u32(static_cast<std::uint32_t>(t->cols));
        for (float v : t->a) w.f32(v);
    }
    w.finish_to_file(path);
}

inline Checkpoint load_checkpoint(const std::filesystem::path& path,
                                  std::optional<std::uint64_t> expect_schema_hash = std::nullopt) {
    BinReader r = BinReader::from_file(path);
    if (r.raw(kCheckpointMagic.size()) != kCheckpointMagic) {
        throw ParseError(path.string() + ": not a checkpoint (bad magic)");
    }
    Checkpoint c;
    c.version = r.u32();
    if (c.version != kCheckpointVersion) {
        throw CompatibilityError(path.string() + ": unsupported checkpoint version " +
                                 std::to_string(c.version));
    }
    const std::uint32_t hlen = r.u32();
    nlohmann::json header;
    try {
        header = nlohmann::json::parse(r.raw(hlen));
    } catch (const nlohmann::json::exception& e) {
        throw IntegrityError(path.string() + ": bad checkpoint header: " + e.what());
    }
    c.schema_hash = header.at("schema_hash").get<std::uint64_t>();
    if (expect_schema_hash && c.schema_hash != *expect_schema_hash) {
        throw CompatibilityError(path.string() + ": schema hash mismatch");
    }
    c.cfg = TrainConfig::from_json(header.at("config"));
    c.scheduler_epoch = header.at("scheduler_epoch").get<int>();
    c.epoch = header.at("epoch").get<int>();
    c.avg_train_loss = header.at("avg_train_loss").get<double>();
    const auto& vj = header.at("val");
    c.val.loss = vj.at("loss").get<double>();
    c.val.accuracy = vj.at("accuracy").get<double>();
    c.val.auc = vj.at("auc").is_null() ? std::numeric_limits<double>::quiet_NaN()
                                       : vj.at("auc").get<double>();
    c.val.precision = vj.at("precision").get<double>();
    c.val.recall = vj.at("recall").get<double>();
    c.val.f1 = vj.at("f1").get<double>();
    c.val.specificity = vj.at("specificity").get<double>();

    c.params = make_empty_params<float>(c.cfg.model);
    c.opt = AdamWState<float>::zeros_like(c.params);
    c.opt.step = header.at("opt_step").get<std::int64_t>();

    std::unordered_map<std::string, Mat<float>*> slots;
    for_each_tensor(c.params, [&](const std::string& name, Mat<float>& t) { slots[name] = &t; });
    {
        std::size_t i = 0;
        for_each_tensor(c.params, [&](const std::string& name, Mat<float>&) {
            slots["opt.m." + name] = &c.opt.m[i];
            slots["opt.v." + name] = &c.opt.v[i];
            ++i;
        });
    }
    const std::uint64_t count = r.u64();
    if (count != slots.size()) {
        throw IntegrityError(path.string() + ": unexpected tensor count");
    }
    for (std::uint64_t i = 0; i < count; ++i) {
        const std::string name = r.str16();
        auto it = slots.find(name);
        if (it == slots.end()) throw IntegrityError(path.string() + ": unknown tensor " + name);
        Mat<float>& t = *it->second;
        const std::uint32_t rows = r.u32();
        const std::uint32_t cols = r.u32();
        if (rows != t.rows || cols != t.cols) {
            throw IntegrityError(path.string() + ": tensor shape mismatch for " + name);
        }
        for (auto& v : t.a) v = r.f32();
    }
    r.expect_end();
    return c;
}

// ---------------------------------------------------------------------------
// Training loop
// ---------------------------------------------------------------------------

namespace detail {

inline bool monitors(const TrainConfig& cfg, const char* what) {
    for (const auto& m : cfg.monitor) {
        if (m == what) return true;
    }
    return false;
}

// Validation loss always; threshold metrics and AUC per the monitor list.
inline ValSummary validate_epoch(const ModelParams<float>& params, const WindowSet& val,
                                 const TrainConfig& cfg) {
    const std::vector<float> logits =
        score_logits(params, val, static_cast<std::size_t>(cfg.batch_size));
    std::vector<int> labels(val.size());
    for (std::size_t i = 0; i < val.size(); ++i) labels[i] = val.windows[i].label;
    ValSummary s;
    s.loss = bce_with_logits(logits, labels).loss;
    const std::vector<double> scores = scores_from_logits(logits);
    if (monitors(cfg, "accuracy")) {
        const ConfusionCounts counts = confusion_at(scores, labels, cfg.eval_threshold);
        const Metrics m = classification_metrics(counts);
        s.accuracy = m.accuracy;
        s.precision = m.precision;
        s.recall = m.recall;
        s.f1 = m.f1;
        s.specificity = m.specificity;
    }
    const bool both = std::count(labels.begin(), labels.end(), 1) > 0 &&
                      std::count(labels.begin(), labels.end(), 0) > 0;
    if (both && monitors(cfg, "auc")) s.auc = roc_auc(scores, labels).auc;
    return s;
}

} // namespace detail

// Epoch loop: seeded batches, forward/loss/backward/optimizer step per batch,
// StepLR per epoch, validation after each epoch, early stop on validation
// loss, best (lowest validation loss) checkpoint returned. Deterministic:
// the same config and data reproduce bit-identical parameters.
template <typename ProgressFn>
TrainResult train(const TrainConfig& cfg, const WindowSet& train_set, const WindowSet& val_set,
                  ProgressFn&& progress) {
    cfg.validate();
    if (train_set.empty() || val_set.empty()) {
        throw ValidationError("train: empty train or validation set");
    }
    if (train_set.schema_hash != val_set.schema_hash) {
        throw ValidationError("train: schema hash mismatch between train and validation sets");
    }

    ModelParams<float> params = init_params<float>(cfg.seed, cfg.model);
    AdamWState<float> opt = AdamWState<float>::zeros_like(params);

    TrainResult result;
    double best_loss = std::numeric_limits<double>::infinity();
    int since_best = 0;

    for (int epoch = 0; epoch < cfg.max_epochs; ++epoch) {
        const double lr = scheduler_lr(cfg.schedule, epoch);
        const auto batches =
            batch_iter(train_set.size(), cfg.batch_size, cfg.seed, epoch);

        double loss_sum = 0.0;
        for (std::size_t bi = 0; bi < batches.size(); ++bi) {
            const auto& idx = batches[bi];
            std::vector<const ContextWindow*> ptrs(idx.size());
            std::vector<int> labels(idx.size());
            for (std::size_t i = 0; i < idx.size(); ++i) {
                ptrs[i] = &train_set.windows[idx[i]];
                labels[i] = ptrs[i]->label;
            }
            Mat<float> batch = assemble_batch<float>(ptrs, cfg.model);
            ForwardCache<float> cache;
            cache.dropout_key = CounterRng::derive_key(cfg.seed, 0x64726f70ull,
                                                       static_cast<std::uint64_t>(epoch), bi);
            std::vector<float> logits;
            try {
                logits = forward(params, batch, idx.size(), &cache);
            } catch (const NumericError& e) {
                throw NumericError("training diverged at epoch " + std::to_string(epoch) +
                                   ", batch " + std::to_string(bi) + ": " + e.what());
            }
            const BceResult<float> loss = bce_with_logits(logits, labels);
            if (!std::isfinite(loss.loss)) {
                throw NumericError("training diverged at epoch " + std::to_string(epoch) +
                                   ", batch " + std::to_string(bi) + ": non-finite loss");
            }
            loss_sum += loss.loss;
            const ModelParams<float> grads = backward(params, cache, loss.d_logits);
            adamw_step(params, grads, opt, cfg.optimizer, lr);
        }
        const double train_loss = loss_sum / static_cast<double>(batches.size());

        const ValSummary val = detail::validate_epoch(params, val_set, cfg);

        result.history.push_back({epoch, train_loss, val, lr});
        progress(result.history.back());

        if (val.loss < best_loss) {
            best_loss = val.loss;
            since_best = 0;
            result.best_epoch = epoch;
            result.best = Checkpoint{kCheckpointVersion, train_set.schema_hash, cfg,    params,
                                     opt,                epoch,                 epoch, train_loss,
                                     val};
        } else {
            ++since_best;
            if (since_best >= cfg.patience) break;
        }
    }
    return result;
}

inline TrainResult train(const TrainConfig& cfg, const WindowSet& train_set,
                         const WindowSet& val_set) {
    return train(cfg, train_set, val_set, [](const EpochStats&) {});
}

// Per-epoch history CSV: epoch,train_loss,val_loss,val_acc,val_auc,lr
inline std::string history_csv(const std::vector<EpochStats>& history) {
    std::string out = "epoch,train_loss,val_loss,val_acc,val_auc,lr\n";
    for (const auto& e : history) {
        out += std::to_string(e.epoch) + "," + std::to_string(e.train_loss) + "," +
               std::to_string(e.val.loss) + "," + std::to_string(e.val.accuracy) + "," +
               (std::isnan(e.val.auc) ? std::string("nan") : std::to_string(e.val.auc)) + "," +
               std::to_string(e.lr) + "\n";
    }
    return out;
}

} // namespace acpt
