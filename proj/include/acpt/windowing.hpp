// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "acpt/common.hpp"
#include "acpt/features.hpp"
#include "acpt/match.hpp"

namespace acpt {

// Window geometry. Row r holds tick kill_tick - before + r; the kill tick is
// the first of the `after` at-and-after rows.
struct WindowSpec {
    int rows = 256;
    int before = 224;
    int after = 32;
};

inline constexpr WindowSpec kDefaultWindowSpec{};

// One kill-centred model input. Values are unit-interval, stored as doubles:
// extraction emits float-representable values (so dataset round-trips are
// bit-exact) while augmented copies keep full precision until persisted.
struct ContextWindow {
    int rows = 256;
    int cols = kTickVectorSize;
    std::vector<double> values; // row-major rows x cols
    int label = 0;              // 1 = cheater kill
    std::string match_id;
    std::int64_t kill_tick = 0;
    std::string attacker_id;
    bool padded = false;    // window overlapped a match boundary
    bool augmented = false;
    bool clamped = false;   // augmentation pushed a coordinate into a bound

    double& at(int r, int c) { return values[static_cast<std::size_t>(r) * cols + c]; }
    double at(int r, int c) const { return values[static_cast<std::size_t>(r) * cols + c]; }
    std::span<const double> row(int r) const {
        return {values.data() + static_cast<std::size_t>(r) * cols, static_cast<std::size_t>(cols)};
    }

    friend bool operator==(const ContextWindow&, const ContextWindow&) = default;
};

struct WindowSet {
    std::vector<ContextWindow> windows;
    std::uint64_t schema_hash = 0;
    std::array<std::int64_t, 2> label_counts{0, 0};

    void add(ContextWindow w) {
        ++label_counts[static_cast<std::size_t>(w.label)];
        windows.push_back(std::move(w));
    }

    std::size_t size() const { return windows.size(); }
    bool empty() const { return windows.empty(); }

    // Recomputed-count consistency check.
    bool counts_consistent() const {
        std::array<std::int64_t, 2> c{0, 0};
        for (const auto& w : windows) ++c[static_cast<std::size_t>(w.label)];
        return c == label_counts;
    }
};

inline ContextWindow extract_window(const MatchRecord& match, const KillEvent& kill,
                                    const FeatureSchema& schema,
                                    const WindowSpec& spec = kDefaultWindowSpec) {
    if (!kill.scorable()) {
        throw ValidationError("extract_window: kill at tick " + std::to_string(kill.kill_tick) +
                              " is not scorable (bot participant)");
    }
    const std::string& attacker = *kill.attacker_id;
    const std::string& victim = *kill.victim_id;
    const PlayerRef* ap = match.find_player(attacker);
    if (ap == nullptr) {
        throw ValidationError("extract_window: unknown attacker '" + attacker + "'");
    }

    ContextWindow w;
    w.rows = spec.rows;
    w.cols = kTickVectorSize;
    w.values.resize(static_cast<std::size_t>(spec.rows) * kTickVectorSize);
    w.label = ap->is_cheater ? 1 : 0;
    w.match_id = match.match_id;
    w.kill_tick = kill.kill_tick;
    w.attacker_id = attacker;

    for (int r = 0; r < spec.rows; ++r) {
        const std::int64_t t = kill.kill_tick - spec.before + r;
        const std::int64_t tc = std::clamp<std::int64_t>(t, 0, match.tick_count - 1);
        if (tc != t) w.padded = true; // edge replication
        if (!match.has_row(attacker, tc) || !match.has_row(victim, tc)) {
            throw DataGapError("extract_window: missing tick row at tick " + std::to_string(tc) +
                               " for kill at tick " + std::to_string(kill.kill_tick));
        }
        const TickVector tv =
            encode_tick(match.row(attacker, tc), match.row(victim, tc), kill, match.map_name, schema);
        for (int c = 0; c < kTickVectorSize; ++c) {
            w.at(r, c) = static_cast<double>(tv[static_cast<std::size_t>(c)]);
        }
    }
    return w;
}

// One window per scorable kill, in kill order.
inline WindowSet extract_all(const MatchRecord& match, const FeatureSchema& schema,
                             const WindowSpec& spec = kDefaultWindowSpec) {
    WindowSet out;
    out.schema_hash = schema.content_hash();
    for (const auto& kill : list_scorable_kills(match)) {
        try {
            out.add(extract_window(match, kill, schema, spec));
        } catch (const DataGapError& e) {
            throw DataGapError(std::string(e.what()) + " [match " + match.match_id + ", attacker " +
                               kill.attacker_id.value_or("?") + "]");
        }
    }
    return out;
}

} // namespace acpt
