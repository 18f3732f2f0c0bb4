// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <numbers>
#include <string>
#include <vector>

#include "acpt/common.hpp"
#include "acpt/match.hpp"
#include "acpt/rng.hpp"
#include "acpt/tables.hpp"

namespace acpt {

// Synthetic matches with separable attacker behavior, for desk-scale
// end-to-end runs. Legit attackers converge on their victim smoothly;
// cheater attackers hold off-target until a discontinuous snap just before
// the kill and shoot through smoke far more often. Everything else (movement,
// health, flashes, noise) is drawn from the same distributions for both,
// so those channels carry no label signal.
struct ArchetypeConfig {
    enum class Kind { legit, cheater };

    Kind kind = Kind::legit;
    int kills = 5;
    double snap_degrees = 100.0;         // cheater: minimum one-tick yaw jump
    int snap_window_ticks = 2;           // cheater: snap lands in the last N pre-kill ticks
    double track_rate_deg_per_tick = 6.0; // legit: max smooth angular rate
    double through_smoke_prob = 0.002;

    static ArchetypeConfig legit_default() { return {}; }

    static ArchetypeConfig cheater_default() {
        ArchetypeConfig a;
        a.kind = Kind::cheater;
        a.through_smoke_prob = 0.85;
        return a;
    }

    void validate() const {
        if (kills < 1) throw ValidationError("synthgen: kills must be >= 1");
        if (snap_window_ticks < 1 || snap_window_ticks >= 224) {
            throw ValidationError("synthgen: snap window must lie inside the pre-kill segment");
        }
        if (snap_degrees <= 0 || track_rate_deg_per_tick <= 0) {
            throw ValidationError("synthgen: rates must be positive");
        }
    }
};

namespace synth_detail {

inline constexpr std::int64_t kFirstKillTick = 300;
inline constexpr std::int64_t kKillSpacing = 288;
inline constexpr double kArenaBound = 2200.0;
inline constexpr double kSpeedCap = 220.0;

inline double wrap_deg(double a) {
    while (a > 180.0) a -= 360.0;
    while (a <= -180.0) a += 360.0;
    return a;
}

// Shortest signed step from `from` toward `to`, capped at max_step.
inline double step_toward(double from, double to, double max_step) {
    const double err = wrap_deg(to - from);
    const double step = std::clamp(err, -max_step, max_step);
    return wrap_deg(from + step);
}

struct Body {
    std::vector<double> x, y, z, vx, vy, vz;
};

// Bounded random walk with reflective walls and occasional 24-tick hops.
inline Body simulate_movement(std::int64_t ticks, std::uint64_t key) {
    CounterRng rng(key);
    Body b;
    b.x.resize(static_cast<std::size_t>(ticks));
    b.y.resize(static_cast<std::size_t>(ticks));
    b.z.resize(static_cast<std::size_t>(ticks));
    b.vx.assign(static_cast<std::size_t>(ticks), 0.0);
    b.vy.assign(static_cast<std::size_t>(ticks), 0.0);
    b.vz.assign(static_cast<std::size_t>(ticks), 0.0);

    double px = rng.uniform(-1800.0, 1800.0);
    double py = rng.uniform(-1800.0, 1800.0);
    const double ground = rng.uniform(0.0, 200.0);
    double vx = rng.uniform(-kSpeedCap, kSpeedCap);
    double vy = rng.uniform(-kSpeedCap, kSpeedCap);
    int hop_left = 0;
    int hop_len = 24;

    for (std::int64_t t = 0; t < ticks; ++t) {
        vx = std::clamp(vx + rng.gaussian(0.0, 10.0), -kSpeedCap, kSpeedCap);
        vy = std::clamp(vy + rng.gaussian(0.0, 10.0), -kSpeedCap, kSpeedCap);
        px += vx / 64.0;
        py += vy / 64.0;
        if (std::abs(px) > kArenaBound) {
            px = std::clamp(px, -kArenaBound, kArenaBound);
            vx = -vx;
        }
        if (std::abs(py) > kArenaBound) {
            py = std::clamp(py, -kArenaBound, kArenaBound);
            vy = -vy;
        }
        double z = ground;
        double vz = 0.0;
        if (hop_left == 0 && rng.bernoulli(0.005)) hop_left = hop_len;
        if (hop_left > 0) {
            const double u = static_cast<double>(hop_len - hop_left) / hop_len;
            z = ground + 40.0 * std::sin(std::numbers::pi * u);
            vz = 40.0 * std::numbers::pi / hop_len * std::cos(std::numbers::pi * u) * 64.0;
            --hop_left;
        }
        const std::size_t i = static_cast<std::size_t>(t);
        b.x[i] = px;
        b.y[i] = py;
        b.z[i] = z;
        b.vx[i] = vx;
        b.vy[i] = vy;
        b.vz[i] = vz;
    }
    return b;
}

inline double target_yaw(const Body& att, const Body& vic, std::int64_t t) {
    const std::size_t i = static_cast<std::size_t>(t);
    return wrap_deg(std::atan2(vic.y[i] - att.y[i], vic.x[i] - att.x[i]) * 180.0 /
                    std::numbers::pi);
}

inline double target_pitch(const Body& att, const Body& vic, std::int64_t t) {
    const std::size_t i = static_cast<std::size_t>(t);
    const double dx = vic.x[i] - att.x[i];
    const double dy = vic.y[i] - att.y[i];
    const double dxy = std::max(1.0, std::sqrt(dx * dx + dy * dy));
    return std::clamp(std::atan2(vic.z[i] - att.z[i], dxy) * 180.0 / std::numbers::pi, -85.0, 85.0);
}

} // namespace synth_detail

inline MatchRecord generate_match(std::uint64_t seed, const std::string& map_name,
                                  const std::vector<ArchetypeConfig>& archetypes) {
    using namespace synth_detail;
    if (archetypes.empty()) throw ValidationError("generate_match: need at least one archetype");
    for (const auto& a : archetypes) a.validate();
    map_index(map_name); // validates

    const int n_attackers = static_cast<int>(archetypes.size());
    constexpr int kVictims = 2;

    // Kill schedule: round-robin over attackers with remaining quota.
    struct PlannedKill {
        std::int64_t tick;
        int attacker;
        int victim;
    };
    std::vector<PlannedKill> plan;
    {
        std::vector<int> quota, ordinal;
        for (const auto& a : archetypes) {
            quota.push_back(a.kills);
            ordinal.push_back(0);
        }
        int g = 0;
        int remaining = 0;
        for (int q : quota) remaining += q;
        int turn = 0;
        while (remaining > 0) {
            if (quota[static_cast<std::size_t>(turn)] > 0) {
                // Every attacker alternates victims on its own kill ordinal,
                // so victim identity carries no attacker signal.
                plan.push_back({kFirstKillTick + kKillSpacing * g, turn,
                                ordinal[static_cast<std::size_t>(turn)] % kVictims});
                ++ordinal[static_cast<std::size_t>(turn)];
                --quota[static_cast<std::size_t>(turn)];
                --remaining;
                ++g;
            }
            turn = (turn + 1) % n_attackers;
        }
    }
    const std::int64_t ticks = plan.back().tick + 64;

    MatchRecord m;
    m.match_id = [&] {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "m%016llx",
                      static_cast<unsigned long long>(mix64(seed ^ 0x6163707473796eull)));
        return std::string(buf);
    }();
    m.map_name = map_name;
    m.tick_count = ticks;

    // Movement for everyone first; aim overlays need victim positions.
    std::vector<Body> bodies;
    std::vector<std::string> ids;
    for (int a = 0; a < n_attackers; ++a) {
        ids.push_back("a" + std::to_string(a));
        bodies.push_back(simulate_movement(ticks, CounterRng::derive_key(seed, 1, static_cast<std::uint64_t>(a))));
        m.players.push_back({ids.back(), archetypes[static_cast<std::size_t>(a)].kind ==
                                             ArchetypeConfig::Kind::cheater});
    }
    for (int v = 0; v < kVictims; ++v) {
        ids.push_back("v" + std::to_string(v));
        bodies.push_back(simulate_movement(
            ticks, CounterRng::derive_key(seed, 2, static_cast<std::uint64_t>(v))));
        m.players.push_back({ids.back(), false});
    }

    const std::size_t n_players = ids.size();
    std::vector<std::vector<TickRow>> rows(n_players,
                                           std::vector<TickRow>(static_cast<std::size_t>(ticks)));

    // Baseline channels, identically distributed for every player.
    for (std::size_t p = 0; p < n_players; ++p) {
        CounterRng rng(CounterRng::derive_key(seed, 3, p));
        const Body& b = bodies[p];
        double yaw = rng.uniform(-180.0, 180.0);
        double pitch = rng.uniform(-15.0, 15.0);
        double flash = 0.0;
        int noise_left = 0;
        int crouch_left = 0;
        for (std::int64_t t = 0; t < ticks; ++t) {
            const std::size_t i = static_cast<std::size_t>(t);
            yaw = wrap_deg(yaw + rng.gaussian(0.0, 0.6));
            pitch = std::clamp(pitch + rng.gaussian(0.0, 0.3), -85.0, 85.0);
            if (rng.bernoulli(0.003)) flash = rng.uniform(0.5, 2.5);
            flash = std::max(0.0, flash - 1.0 / 64.0);
            if (noise_left == 0 && rng.bernoulli(0.02)) noise_left = 16;
            if (crouch_left == 0 && rng.bernoulli(0.004)) crouch_left = 32;
            TickRow& r = rows[p][i];
            r.x = static_cast<float>(b.x[i]);
            r.y = static_cast<float>(b.y[i]);
            r.z = static_cast<float>(b.z[i]);
            r.vx = static_cast<float>(b.vx[i]);
            r.vy = static_cast<float>(b.vy[i]);
            r.vz = static_cast<float>(b.vz[i]);
            r.yaw = static_cast<float>(yaw);
            r.pitch = static_cast<float>(pitch);
            r.health = 100.0f;
            r.armor = 100.0f;
            r.flash_duration = static_cast<float>(flash);
            r.made_noise = noise_left > 0;
            r.is_crouching = crouch_left > 0;
            r.is_airborne = b.vz[i] != 0.0;
            r.is_scoped = false;
            if (noise_left > 0) --noise_left;
            if (crouch_left > 0) --crouch_left;
        }
    }

    // Kill events and attacker aim overlays.
    static const std::array<std::string_view, 8> kWeapons = {
        "ak47", "m4a1", "awp", "deagle", "mp9", "usp_silencer", "galilar", "mac10"};
    for (std::size_t ki = 0; ki < plan.size(); ++ki) {
        const PlannedKill& pk = plan[ki];
        const ArchetypeConfig& arch = archetypes[static_cast<std::size_t>(pk.attacker)];
        CounterRng rng(CounterRng::derive_key(seed, 4, ki));

        KillEvent kill;
        kill.kill_tick = pk.tick;
        kill.attacker_id = ids[static_cast<std::size_t>(pk.attacker)];
        kill.victim_id = ids[static_cast<std::size_t>(n_attackers + pk.victim)];
        kill.weapon_name = std::string(kWeapons[rng.below(kWeapons.size())]);
        kill.headshot = rng.bernoulli(0.4);
        kill.through_smoke = rng.bernoulli(arch.through_smoke_prob);
        m.kills.push_back(kill);

        const Body& att = bodies[static_cast<std::size_t>(pk.attacker)];
        const Body& vic = bodies[static_cast<std::size_t>(n_attackers + pk.victim)];
        auto& arow = rows[static_cast<std::size_t>(pk.attacker)];

        const std::int64_t engage_start = std::max<std::int64_t>(0, pk.tick - 230);
        const bool cheater = arch.kind == ArchetypeConfig::Kind::cheater;
        const int snap_offset = cheater ? 1 + static_cast<int>(rng.below(
                                             static_cast<std::uint64_t>(arch.snap_window_ticks)))
                                        : 0;
        const std::int64_t snap_tick = pk.tick - snap_offset;
        const double offside =
            (rng.bernoulli(0.5) ? 1.0 : -1.0) * (arch.snap_degrees + 20.0);

        double yaw = arow[static_cast<std::size_t>(engage_start)].yaw;
        double pitch = arow[static_cast<std::size_t>(engage_start)].pitch;
        for (std::int64_t t = engage_start; t <= std::min(pk.tick + 40, ticks - 1); ++t) {
            const double tyaw = target_yaw(att, vic, t);
            const double tpitch = target_pitch(att, vic, t);
            double goal;
            if (cheater) {
                // Track a deliberately wrong point, then lock on at the snap.
                goal = t < snap_tick ? wrap_deg(tyaw + offside) : wrap_deg(tyaw + rng.gaussian(0.0, 0.2));
            } else {
                goal = wrap_deg(tyaw + rng.gaussian(0.0, 0.4));
            }
            if (cheater && t == snap_tick) {
                yaw = goal; // discontinuity >= snap_degrees by construction
            } else {
                yaw = step_toward(yaw, goal, arch.track_rate_deg_per_tick);
            }
            pitch = std::clamp(pitch + std::clamp(tpitch - pitch, -3.0, 3.0), -85.0, 85.0);
            auto& r = arow[static_cast<std::size_t>(t)];
            r.yaw = static_cast<float>(yaw);
            r.pitch = static_cast<float>(pitch);
            const bool sniper = kill.weapon_name == "awp" || kill.weapon_name == "ssg08";
            if (sniper && t >= pk.tick - 48 && t <= pk.tick) r.is_scoped = true;
        }

        // A smoke kill usually follows an audible cue from the victim.
        if (kill.through_smoke && rng.bernoulli(0.8)) {
            auto& vrow = rows[static_cast<std::size_t>(n_attackers + pk.victim)];
            for (std::int64_t t = std::max<std::int64_t>(0, pk.tick - 24); t <= pk.tick; ++t) {
                vrow[static_cast<std::size_t>(t)].made_noise = true;
            }
        }

        // Brief health dip on the victim after the kill.
        auto& vrow = rows[static_cast<std::size_t>(n_attackers + pk.victim)];
        for (std::int64_t t = pk.tick; t < std::min(pk.tick + 64, ticks); ++t) {
            vrow[static_cast<std::size_t>(t)].health = 30.0f;
        }
    }

    for (std::size_t p = 0; p < n_players; ++p) {
        m.ticks.emplace(ids[p], std::move(rows[p]));
    }
    validate(m);
    return m;
}

// Deterministic corpus; exactly round(n * cheater_fraction) matches contain a
// cheater attacker (picked by a seeded shuffle of the match indices).
inline std::vector<MatchRecord> generate_corpus(std::uint64_t seed, int n_matches,
                                                double cheater_fraction, int kills_per_attacker = 5) {
    if (n_matches < 3) throw ValidationError("generate_corpus: need at least 3 matches");
    if (cheater_fraction < 0.0 || cheater_fraction > 1.0) {
        throw ValidationError("generate_corpus: cheater_fraction must be in [0, 1]");
    }
    const int n_cheater = static_cast<int>(std::llround(cheater_fraction * n_matches));
    std::vector<int> idx(static_cast<std::size_t>(n_matches));
    for (int i = 0; i < n_matches; ++i) idx[static_cast<std::size_t>(i)] = i;
    CounterRng rng(CounterRng::derive_key(seed, 5));
    deterministic_shuffle(idx, rng);
    std::vector<bool> has_cheater(static_cast<std::size_t>(n_matches), false);
    for (int i = 0; i < n_cheater; ++i) has_cheater[static_cast<std::size_t>(idx[static_cast<std::size_t>(i)])] = true;

    std::vector<MatchRecord> out;
    out.reserve(static_cast<std::size_t>(n_matches));
    for (int i = 0; i < n_matches; ++i) {
        ArchetypeConfig legit = ArchetypeConfig::legit_default();
        legit.kills = kills_per_attacker;
        ArchetypeConfig cheat = ArchetypeConfig::cheater_default();
        cheat.kills = kills_per_attacker;
        const std::vector<ArchetypeConfig> archetypes =
            has_cheater[static_cast<std::size_t>(i)] ? std::vector<ArchetypeConfig>{cheat, legit}
                                                     : std::vector<ArchetypeConfig>{legit, legit};
        MatchRecord m = generate_match(CounterRng::derive_key(seed, 6, static_cast<std::uint64_t>(i)),
                                       std::string(kMapTable[static_cast<std::size_t>(i) % kMapTable.size()]),
                                       archetypes);
        m.match_id += "_" + std::to_string(i);
        out.push_back(std::move(m));
    }
    return out;
}

} // namespace acpt
