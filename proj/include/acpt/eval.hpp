// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include <json.hpp>

#include "acpt/common.hpp"
#include "acpt/loss.hpp"
#include "acpt/match.hpp"
#include "acpt/model.hpp"
#include "acpt/windowing.hpp"

namespace acpt {

struct ConfusionCounts {
    std::int64_t tp = 0, fp = 0, tn = 0, fn = 0;

    std::int64_t total() const { return tp + fp + tn + fn; }

    friend bool operator==(const ConfusionCounts&, const ConfusionCounts&) = default;
};

// Prediction is positive iff score >= threshold ("or higher").
inline ConfusionCounts confusion_at(const std::vector<double>& scores, const std::vector<int>& labels,
                                    double threshold) {
    if (scores.empty() || scores.size() != labels.size()) {
        throw ValidationError("confusion_at: empty input or size mismatch");
    }
    ConfusionCounts c;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (labels[i] != 0 && labels[i] != 1) {
            throw ValidationError("confusion_at: label must be 0 or 1");
        }
        const bool pred = scores[i] >= threshold;
        const bool pos = labels[i] == 1;
        if (pred && pos) ++c.tp;
        else if (pred && !pos) ++c.fp;
        else if (!pred && pos) ++c.fn;
        else ++c.tn;
    }
    return c;
}

// Standard definitions; a zero denominator yields 0 with the matching
// `*_defined` flag cleared.
struct Metrics {
    double accuracy = 0, precision = 0, recall = 0, f1 = 0, specificity = 0;
    bool precision_defined = true, recall_defined = true, f1_defined = true,
         specificity_defined = true;
};

inline Metrics classification_metrics(const ConfusionCounts& c) {
    if (c.total() <= 0) throw ValidationError("classification_metrics: empty counts");
    Metrics m;
    m.accuracy = static_cast<double>(c.tp + c.tn) / static_cast<double>(c.total());
    if (c.tp + c.fp > 0) {
        m.precision = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp);
    } else {
        m.precision_defined = false;
    }
    if (c.tp + c.fn > 0) {
        m.recall = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
    } else {
        m.recall_defined = false;
    }
    if (m.precision + m.recall > 0 && m.precision_defined && m.recall_defined) {
        m.f1 = 2.0 * m.precision * m.recall / (m.precision + m.recall);
    } else {
        m.f1 = 0.0;
        m.f1_defined = m.precision_defined && m.recall_defined && false;
    }
    if (c.tn + c.fp > 0) {
        m.specificity = static_cast<double>(c.tn) / static_cast<double>(c.tn + c.fp);
    } else {
        m.specificity_defined = false;
    }
    return m;
}

struct RocPoint {
    double fpr = 0, tpr = 0, threshold = 0;
};

struct RocResult {
    double auc = 0;
    std::vector<RocPoint> points;
};

// ROC sweep over all distinct scores (descending), trapezoidal area. Tied
// scores advance TP and FP together, which makes the trapezoid rule agree
// with the Mann-Whitney statistic under half-credit for ties.
inline RocResult roc_auc(const std::vector<double>& scores, const std::vector<int>& labels) {
    if (scores.empty() || scores.size() != labels.size()) {
        throw ValidationError("roc_auc: empty input or size mismatch");
    }
    std::int64_t pos = 0, neg = 0;
    for (int y : labels) {
        if (y != 0 && y != 1) throw ValidationError("roc_auc: label must be 0 or 1");
        y == 1 ? ++pos : ++neg;
    }
    if (pos == 0 || neg == 0) {
        throw ValidationError("roc_auc: need at least one positive and one negative label");
    }

    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

    RocResult out;
    out.points.push_back({0.0, 0.0, std::numeric_limits<double>::infinity()});
    std::int64_t tp = 0, fp = 0;
    double area = 0.0;
    std::size_t i = 0;
    while (i < order.size()) {
        const double s = scores[order[i]];
        std::int64_t dtp = 0, dfp = 0;
        while (i < order.size() && scores[order[i]] == s) {
            labels[order[i]] == 1 ? ++dtp : ++dfp;
            ++i;
        }
        const double fpr0 = static_cast<double>(fp) / static_cast<double>(neg);
        const double tpr0 = static_cast<double>(tp) / static_cast<double>(pos);
        tp += dtp;
        fp += dfp;
        const double fpr1 = static_cast<double>(fp) / static_cast<double>(neg);
        const double tpr1 = static_cast<double>(tp) / static_cast<double>(pos);
        area += (fpr1 - fpr0) * (tpr0 + tpr1) / 2.0;
        out.points.push_back({fpr1, tpr1, s});
    }
    out.auc = area;
    return out;
}

struct EvalReport {
    double threshold = 0.7;
    ConfusionCounts counts;
    Metrics metrics;
    RocResult roc;
    std::vector<double> scores; // per-window, kept only on request
    std::vector<int> labels;

    nlohmann::json to_json(bool include_roc = true) const {
        nlohmann::json j = {
            {"threshold", threshold},
            {"n", counts.total()},
            {"counts", {{"tp", counts.tp}, {"fp", counts.fp}, {"tn", counts.tn}, {"fn", counts.fn}}},
            {"metrics",
             {{"accuracy", metrics.accuracy},
              {"precision", metrics.precision},
              {"precision_defined", metrics.precision_defined},
              {"recall", metrics.recall},
              {"recall_defined", metrics.recall_defined},
              {"f1", metrics.f1},
              {"f1_defined", metrics.f1_defined},
              {"specificity", metrics.specificity},
              {"specificity_defined", metrics.specificity_defined}}},
            {"auc", roc.auc},
        };
        if (include_roc) {
            nlohmann::json pts = nlohmann::json::array();
            for (const auto& p : roc.points) {
                pts.push_back({p.fpr, p.tpr, p.threshold});
            }
            j["roc"] = pts;
        }
        return j;
    }
};

// ---------------------------------------------------------------------------
// Model scoring
// ---------------------------------------------------------------------------

// Copies window values (doubles in memory) into the float batch layout the
// model consumes.
template <typename T>
Mat<T> assemble_batch(const std::vector<const ContextWindow*>& windows, const ModelConfig& cfg) {
    const std::size_t R = static_cast<std::size_t>(cfg.window_rows);
    const std::size_t D = static_cast<std::size_t>(cfg.d_model);
    Mat<T> batch(windows.size() * R, D);
    for (std::size_t b = 0; b < windows.size(); ++b) {
        const ContextWindow& w = *windows[b];
        if (static_cast<std::size_t>(w.rows) != R || static_cast<std::size_t>(w.cols) != D) {
            throw ValidationError("assemble_batch: window shape does not match the model");
        }
        for (std::size_t i = 0; i < R * D; ++i) {
            batch.a[b * R * D + i] = static_cast<T>(w.values[i]);
        }
    }
    return batch;
}

// Logits for every window. Row results are independent of how the windows
// are grouped into batches, so this is bitwise-stable for any batch size.
inline std::vector<float> score_logits(const ModelParams<float>& params, const WindowSet& ws,
                                       std::size_t batch_size = 128) {
    std::vector<float> logits;
    logits.reserve(ws.size());
    for (std::size_t at = 0; at < ws.size(); at += batch_size) {
        const std::size_t n = std::min(batch_size, ws.size() - at);
        std::vector<const ContextWindow*> ptrs(n);
        for (std::size_t i = 0; i < n; ++i) ptrs[i] = &ws.windows[at + i];
        Mat<float> batch = assemble_batch<float>(ptrs, params.cfg);
        const std::vector<float> out = forward(params, batch, n);
        logits.insert(logits.end(), out.begin(), out.end());
    }
    return logits;
}

// Sigmoid applied outside the model: the network itself emits logits.
inline std::vector<double> scores_from_logits(const std::vector<float>& logits) {
    std::vector<double> s(logits.size());
    for (std::size_t i = 0; i < logits.size(); ++i) s[i] = sigmoid(static_cast<double>(logits[i]));
    return s;
}

inline EvalReport evaluate(const ModelParams<float>& params, const WindowSet& ws, double threshold,
                           bool keep_scores = false) {
    if (ws.empty()) throw ValidationError("evaluate: empty window set");
    const std::vector<double> scores = scores_from_logits(score_logits(params, ws));
    std::vector<int> labels(ws.size());
    for (std::size_t i = 0; i < ws.size(); ++i) labels[i] = ws.windows[i].label;

    EvalReport r;
    r.threshold = threshold;
    r.counts = confusion_at(scores, labels, threshold);
    r.metrics = classification_metrics(r.counts);
    r.roc = roc_auc(scores, labels);
    if (keep_scores) {
        r.scores = scores;
        r.labels = labels;
    }
    return r;
}

// ---------------------------------------------------------------------------
// Per-player kill timeline
// ---------------------------------------------------------------------------

struct TimelineEntry {
    int kill_index = 0; // index within this player's scorable kills
    std::int64_t kill_tick = 0;
    double probability = 0;
};

struct KillTimeline {
    std::string player_id;
    std::vector<TimelineEntry> entries;
    double mean_probability = 0;
};

inline KillTimeline player_timeline(const ModelParams<float>& params, const MatchRecord& match,
                                    const std::string& player_id, const FeatureSchema& schema) {
    WindowSet ws;
    ws.schema_hash = schema.content_hash();
    std::vector<std::int64_t> ticks;
    WindowSpec spec;
    spec.rows = params.cfg.window_rows;
    spec.after = std::min(kDefaultWindowSpec.after, std::max(1, spec.rows / 8));
    spec.before = spec.rows - spec.after;
    for (const auto& kill : list_scorable_kills(match)) {
        if (*kill.attacker_id != player_id) continue;
        ws.add(extract_window(match, kill, schema, spec));
        ticks.push_back(kill.kill_tick);
    }
    if (ws.empty()) {
        throw ValidationError("player_timeline: player '" + player_id +
                              "' has no scorable kills as attacker");
    }
    const std::vector<double> probs = scores_from_logits(score_logits(params, ws));

    KillTimeline t;
    t.player_id = player_id;
    double sum = 0.0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        t.entries.push_back({static_cast<int>(i), ticks[i], probs[i]});
        sum += probs[i];
    }
    t.mean_probability = sum / static_cast<double>(probs.size());
    return t;
}

// CSV emitters for plots: `fpr,tpr,threshold` / `kill_index,kill_tick,probability`.
inline std::string roc_csv(const RocResult& roc) {
    std::string out = "fpr,tpr,threshold\n";
    for (const auto& p : roc.points) {
        out += std::to_string(p.fpr) + "," + std::to_string(p.tpr) + "," +
               std::to_string(p.threshold) + "\n";
    }
    return out;
}

inline std::string timeline_csv(const KillTimeline& t) {
    std::string out = "kill_index,kill_tick,probability\n";
    for (const auto& e : t.entries) {
        out += std::to_string(e.kill_index) + "," + std::to_string(e.kill_tick) + "," +
               std::to_string(e.probability) + "\n";
    }
    return out;
}

} // namespace acpt
