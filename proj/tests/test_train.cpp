// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <fstream>

#include "acpt/train.hpp"
#include "test_helpers.hpp"

using namespace acpt;
using acpt_test::scratch_dir;

namespace {

// Small linearly separable windows: one column carries the label.
WindowSet separable_set(int n, std::uint64_t seed, int rows = 24, bool invert_labels = false) {
    CounterRng rng(seed);
    WindowSet ws;
    ws.schema_hash = FeatureSchema::standard().content_hash();
    for (int i = 0; i < n; ++i) {
        const int label = i % 2;
        ContextWindow w = acpt_test::random_window(rng, invert_labels ? 1 - label : label,
                                                   "m" + std::to_string(i % 5), rows);
        for (int r = 0; r < rows; ++r) {
            w.at(r, 10) = label == 1 ? 0.95 : 0.05;
            w.at(r, 11) = label == 1 ? 0.9 : 0.1;
        }
        ws.add(std::move(w));
    }
    return ws;
}

TrainConfig small_cfg(int max_epochs, int batch = 8) {
    TrainConfig cfg;
    cfg.batch_size = batch;
    cfg.max_epochs = max_epochs;
    cfg.patience = 5;
    cfg.seed = 42;
    cfg.model.window_rows = 24;
    cfg.schedule.base_lr = 3e-4; // a bit hotter than production for tiny data
    return cfg;
}

} // namespace

TEST_CASE("training on separable data reduces the loss monotonically at first") {
    const WindowSet train_ws = separable_set(40, 1);
    const WindowSet val_ws = separable_set(16, 2);
    const TrainResult r = train(small_cfg(3), train_ws, val_ws);
    REQUIRE(r.history.size() == 3);
    CHECK(r.history[1].train_loss < r.history[0].train_loss);
    CHECK(r.history[2].train_loss < r.history[1].train_loss);
    CHECK(r.best_epoch == 2);
    const TrainConfig used = small_cfg(3);
    for (const auto& e : r.history) {
        CHECK(e.lr == scheduler_lr(used.schedule, e.epoch)); // exact
        CHECK(std::isfinite(e.train_loss));
    }
}

TEST_CASE("early stopping: patience 1 with worsening validation stops after epoch 2") {
    const WindowSet train_ws = separable_set(40, 3);
    // Inverted validation labels: fitting train makes validation strictly worse.
    const WindowSet val_ws = separable_set(16, 4, 24, true);
    TrainConfig cfg = small_cfg(20);
    cfg.patience = 1;
    const TrainResult r = train(cfg, train_ws, val_ws);
    CHECK(r.history.size() == 2);
    CHECK(r.best_epoch == 0);
    CHECK(r.best.epoch == 0);
}

TEST_CASE("the best checkpoint carries the minimum validation loss") {
    const WindowSet train_ws = separable_set(40, 5);
    const WindowSet val_ws = separable_set(16, 6);
    const TrainResult r = train(small_cfg(4), train_ws, val_ws);
    double best = 1e300;
    for (const auto& e : r.history) best = std::min(best, e.val.loss);
    CHECK(r.best.val.loss == best);
    CHECK(r.history.size() <= 4);
}

TEST_CASE("training is bit-deterministic; checkpoints byte-identical") {
    const auto dir = scratch_dir("train_determinism");
    const WindowSet train_ws = separable_set(32, 7);
    const WindowSet val_ws = separable_set(12, 8);
    const TrainConfig cfg = small_cfg(2);

    const TrainResult r1 = train(cfg, train_ws, val_ws);
    const TrainResult r2 = train(cfg, train_ws, val_ws);
    REQUIRE(r1.history.size() == r2.history.size());
    for (std::size_t i = 0; i < r1.history.size(); ++i) {
        CHECK(r1.history[i].train_loss == r2.history[i].train_loss);
        CHECK(r1.history[i].val.loss == r2.history[i].val.loss);
    }
    save_checkpoint(r1.best, dir / "a.ckpt");
    save_checkpoint(r2.best, dir / "b.ckpt");
    auto slurp = [](const std::filesystem::path& p) {
        std::ifstream in(p, std::ios::binary);
        return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    };
    CHECK(slurp(dir / "a.ckpt") == slurp(dir / "b.ckpt"));
}

TEST_CASE("divergence aborts with epoch and batch context") {
    const WindowSet train_ws = separable_set(16, 21);
    const WindowSet val_ws = separable_set(8, 22);
    TrainConfig cfg = small_cfg(3);
    cfg.schedule.base_lr = 1e14; // lr large enough to overflow activations
    CHECK_THROWS_WITH_AS(train(cfg, train_ws, val_ws), doctest::Contains("epoch"), NumericError);
}

TEST_CASE("empty sets and schema mismatches are rejected") {
    const WindowSet train_ws = separable_set(8, 9);
    WindowSet empty;
    empty.schema_hash = train_ws.schema_hash;
    CHECK_THROWS_AS(train(small_cfg(1), train_ws, empty), ValidationError);
    WindowSet other = separable_set(8, 10);
    other.schema_hash ^= 1;
    CHECK_THROWS_AS(train(small_cfg(1), train_ws, other), ValidationError);
}

TEST_CASE("checkpoint round-trip reproduces logits bit-exactly") {
    const auto dir = scratch_dir("ckpt_roundtrip");
    const WindowSet train_ws = separable_set(16, 11);
    const WindowSet val_ws = separable_set(8, 12);
    const TrainResult r = train(small_cfg(1), train_ws, val_ws);

    const auto path = dir / "c.ckpt";
    save_checkpoint(r.best, path);
    const Checkpoint back = load_checkpoint(path);
    CHECK(back.schema_hash == r.best.schema_hash);
    CHECK(back.epoch == r.best.epoch);
    CHECK(back.avg_train_loss == r.best.avg_train_loss);
    CHECK(back.opt.step == r.best.opt.step);

    const std::vector<float> before = score_logits(r.best.params, val_ws);
    const std::vector<float> after = score_logits(back.params, val_ws);
    CHECK(before == after); // bitwise

    SUBCASE("schema expectation mismatch refuses to load") {
        CHECK_THROWS_AS(load_checkpoint(path, r.best.schema_hash ^ 1), CompatibilityError);
    }
    SUBCASE("a tampered byte is an integrity error") {
        std::fstream f(path, std::ios::binary | std::ios::in | std::ios::out);
        f.seekg(100);
        char c;
        f.get(c);
        f.seekp(100);
        f.put(static_cast<char>(c ^ 0x01));
        f.close();
        CHECK_THROWS_AS(load_checkpoint(path), IntegrityError);
    }
    SUBCASE("truncation is an integrity error") {
        std::ifstream in(path, std::ios::binary);
        std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
        in.close();
        std::ofstream(path, std::ios::binary | std::ios::trunc)
            << bytes.substr(0, bytes.size() / 2);
        CHECK_THROWS_AS(load_checkpoint(path), IntegrityError);
    }
}

TEST_CASE("history CSV has the documented shape") {
    const WindowSet train_ws = separable_set(16, 13);
    const WindowSet val_ws = separable_set(8, 14);
    const TrainResult r = train(small_cfg(2), train_ws, val_ws);
    const std::string csv = history_csv(r.history);
    CHECK(csv.rfind("epoch,train_loss,val_loss,val_acc,val_auc,lr\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 3); // header + 2 epochs
}
