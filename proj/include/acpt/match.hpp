// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "acpt/common.hpp"
#include "acpt/tables.hpp"

namespace acpt {

// A labelled, identified participant. Bots are never listed here; they appear
// only as absent ids on kill events.
struct PlayerRef {
    std::string player_id;
    bool is_cheater = false;

    friend bool operator==(const PlayerRef&, const PlayerRef&) = default;
};

struct KillEvent {
    std::int64_t kill_tick = 0; // 64 ticks == 1 s
    std::optional<std::string> attacker_id; // absent -> bot
    std::optional<std::string> victim_id;   // absent -> bot
    bool headshot = false;
    bool through_smoke = false;
    std::string weapon_name;

    bool scorable() const { return attacker_id.has_value() && victim_id.has_value(); }

    friend bool operator==(const KillEvent&, const KillEvent&) = default;
};

// One player's state at one tick. Positions are game units, angles degrees,
// velocities units/s. made_noise covers audible events in the trailing 16
// ticks (0.25 s).
struct TickRow {
    float x = 0, y = 0, z = 0;
    float yaw = 0, pitch = 0;
    float vx = 0, vy = 0, vz = 0;
    float health = 100, armor = 0;
    bool is_scoped = false, is_crouching = false, is_airborne = false;
    float flash_duration = 0;
    bool made_noise = false;

    friend bool operator==(const TickRow&, const TickRow&) = default;
};

struct MatchRecord {
    std::string match_id;
    std::string map_name;
    std::int64_t tick_count = 0; // T; rows cover [0, T)
    std::vector<PlayerRef> players;
    std::unordered_map<std::string, std::vector<TickRow>> ticks; // dense per player
    std::vector<KillEvent> kills;

    const PlayerRef* find_player(const std::string& id) const {
        for (const auto& p : players) {
            if (p.player_id == id) return &p;
        }
        return nullptr;
    }

    bool has_row(const std::string& id, std::int64_t tick) const {
        auto it = ticks.find(id);
        return it != ticks.end() && tick >= 0 &&
               tick < static_cast<std::int64_t>(it->second.size());
    }

    const TickRow& row(const std::string& id, std::int64_t tick) const {
        return ticks.at(id)[static_cast<std::size_t>(tick)];
    }

    friend bool operator==(const MatchRecord&, const MatchRecord&) = default;
};

namespace detail {

inline void require(bool ok, const std::string& what) {
    if (!ok) throw ValidationError(what);
}

inline bool finite_row(const TickRow& r) {
    for (float v : {r.x, r.y, r.z, r.yaw, r.pitch, r.vx, r.vy, r.vz, r.health, r.armor,
                    r.flash_duration}) {
        if (!std::isfinite(v)) return false;
    }
    return true;
}

} // namespace detail

// Whole-record validation. Anything that fails is rejected outright; there is
// no repair path.
inline void validate(const MatchRecord& m) {
    using detail::require;

    require(!m.match_id.empty(), "match " + m.match_id + ": empty match_id");
    require(is_supported_map(m.map_name), "match " + m.match_id + ": unknown map '" + m.map_name + "'");
    require(m.tick_count > 0, "match " + m.match_id + ": tick range empty");

    require(!m.kills.empty(), "match " + m.match_id + ": no rounds played");

    std::unordered_map<std::string, int> seen;
    for (const auto& p : m.players) {
        require(!p.player_id.empty(), "match " + m.match_id + ": player with empty id");
        require(seen[p.player_id]++ == 0,
                "match " + m.match_id + ": duplicate player id '" + p.player_id + "'");
    }

    for (const auto& [id, rows] : m.ticks) {
        require(m.find_player(id) != nullptr,
                "match " + m.match_id + ": tick rows for unknown player '" + id + "'");
        (void)rows;
    }
    for (const auto& p : m.players) {
        auto it = m.ticks.find(p.player_id);
        require(it != m.ticks.end() &&
                    static_cast<std::int64_t>(it->second.size()) == m.tick_count,
                "match " + m.match_id + ": tick table gap for player '" + p.player_id + "'");
        for (const auto& r : it->second) {
            require(detail::finite_row(r),
                    "match " + m.match_id + ": non-finite tick value for '" + p.player_id + "'");
            require(r.health >= 0 && r.health <= 100,
                    "match " + m.match_id + ": health out of range for '" + p.player_id + "'");
            require(r.armor >= 0 && r.armor <= 100,
                    "match " + m.match_id + ": armor out of range for '" + p.player_id + "'");
            require(r.flash_duration >= 0,
                    "match " + m.match_id + ": negative flash_duration for '" + p.player_id + "'");
        }
    }

    for (const auto& k : m.kills) {
        require(k.kill_tick >= 0 && k.kill_tick < m.tick_count,
                "match " + m.match_id + ": kill out of tick range");
        if (k.attacker_id && k.victim_id) {
            require(*k.attacker_id != *k.victim_id,
                    "match " + m.match_id + ": kill with attacker == victim");
        }
        for (const auto& id : {k.attacker_id, k.victim_id}) {
            if (id) {
                require(m.find_player(*id) != nullptr,
                        "match " + m.match_id + ": kill references unknown player '" + *id + "'");
            }
        }
    }
}

// Kills with both participants identified (bot kills excluded), in tick order.
inline std::vector<KillEvent> list_scorable_kills(const MatchRecord& m) {
    std::vector<KillEvent> out;
    for (const auto& k : m.kills) {
        if (k.scorable()) out.push_back(k);
    }
    std::stable_sort(out.begin(), out.end(),
                     [](const KillEvent& a, const KillEvent& b) { return a.kill_tick < b.kill_tick; });
    return out;
}

} // namespace acpt
