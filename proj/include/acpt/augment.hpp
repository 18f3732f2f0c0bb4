// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <utility>

#include "acpt/common.hpp"
#include "acpt/features.hpp"
#include "acpt/rng.hpp"
#include "acpt/windowing.hpp"

namespace acpt {

struct AugmentConfig {
    // Offset scale large enough to actually defeat coordinate memorization
    // (a few percent of the coordinate range) while staying a rigid
    // translation that preserves relative geometry exactly.
    double sigma = 256.0;     // noise stddev, raw game units
    int cheater_copies = 3;
    int noncheater_copies = 1;
    std::uint64_t seed = 0;

    void validate() const {
        if (!(sigma > 0)) throw ValidationError("augment: sigma must be > 0");
        if (cheater_copies < 0 || noncheater_copies < 0) {
            throw ValidationError("augment: copy counts must be >= 0");
        }
    }
};

// Rigid scene translation: the same raw-unit offset is applied to the
// attacker and victim coordinates of every row, so relative positioning and
// distance are untouched. Everything else, including the distance slot, is
// left as-is.
inline ContextWindow augment_window(const ContextWindow& window, const std::array<double, 3>& offset,
                                    const FeatureSchema& schema) {
    if (window.augmented) throw ValidationError("augment_window: input is already augmented");
    for (double o : offset) {
        if (!std::isfinite(o)) throw NumericError("augment_window: non-finite offset");
    }

    ContextWindow out = window;
    out.augmented = true;

    static constexpr std::array<int, 3> kAttackerSlots = {kSlotAttackerX, kSlotAttackerY,
                                                          kSlotAttackerZ};
    static constexpr std::array<int, 3> kVictimSlots = {kSlotVictimX, kSlotVictimY, kSlotVictimZ};

    for (int axis = 0; axis < 3; ++axis) {
        for (int slot : {kAttackerSlots[static_cast<std::size_t>(axis)],
                         kVictimSlots[static_cast<std::size_t>(axis)]}) {
            const auto& d = schema.slots[static_cast<std::size_t>(slot)];
            const double lo = d.lo, hi = d.hi;
            for (int r = 0; r < window.rows; ++r) {
                const double raw = lo + window.at(r, slot) * (hi - lo);
                const double shifted = raw + offset[static_cast<std::size_t>(axis)];
                double u = (shifted - lo) / (hi - lo);
                if (u < 0.0 || u > 1.0) {
                    out.clamped = true;
                    u = std::clamp(u, 0.0, 1.0);
                }
                out.at(r, slot) = u;
            }
        }
    }
    return out;
}

// Exact post-augmentation sizes: every original plus `copies` per label.
inline std::pair<std::int64_t, std::int64_t> augmented_totals(std::int64_t cheater_count,
                                                              std::int64_t noncheater_count,
                                                              const AugmentConfig& cfg) {
    return {cheater_count * (1 + cfg.cheater_copies), noncheater_count * (1 + cfg.noncheater_copies)};
}

// Offsets are drawn from a generator keyed by (seed, window index, copy
// index), so the result does not depend on evaluation order.
inline std::array<double, 3> augment_offset(const AugmentConfig& cfg, std::size_t window_index,
                                            int copy_index) {
    CounterRng rng(CounterRng::derive_key(cfg.seed, 0x6175676d656e7431ull, window_index,
                                          static_cast<std::uint64_t>(copy_index)));
    return rng.gaussian3(cfg.sigma);
}

// Originals first (input order), then copies ordered by (window, copy).
inline WindowSet augment_dataset(const WindowSet& windows, const AugmentConfig& cfg,
                                 const FeatureSchema& schema = FeatureSchema::standard()) {
    cfg.validate();
    for (const auto& w : windows.windows) {
        if (w.augmented) throw ValidationError("augment_dataset: input contains augmented windows");
    }

    WindowSet out;
    out.schema_hash = windows.schema_hash;
    const auto [total1, total0] =
        augmented_totals(windows.label_counts[1], windows.label_counts[0], cfg);
    out.windows.reserve(static_cast<std::size_t>(total0 + total1));

    for (const auto& w : windows.windows) out.add(w);
    for (std::size_t i = 0; i < windows.windows.size(); ++i) {
        const auto& w = windows.windows[i];
        const int copies = w.label == 1 ? cfg.cheater_copies : cfg.noncheater_copies;
        for (int c = 0; c < copies; ++c) {
            out.add(augment_window(w, augment_offset(cfg, i, c), schema));
        }
    }
    return out;
}

} // namespace acpt
