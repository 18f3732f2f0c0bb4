// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "acpt/common.hpp"
#include "acpt/match.hpp"

namespace acpt {

// A match on disk is a pair of files sharing a stem:
//   <stem>.ticks.csv    dense per-player tick table
//   <stem>.events.jsonl header object, then one object per kill
// Floats are printed with std::to_chars (shortest round-trip form), so
// save -> load is field-exact.

inline constexpr std::string_view kTickCsvHeader =
    "tick,player_id,x,y,z,yaw,pitch,vx,vy,vz,health,armor,is_scoped,is_crouching,is_airborne,"
    "flash_duration,made_noise";

inline constexpr std::string_view kEventsSuffix = ".events.jsonl";
inline constexpr std::string_view kTicksSuffix = ".ticks.csv";

namespace detail {

inline std::string fmt_float(float v) {
    char buf[64];
    auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    if (ec != std::errc{}) throw NumericError("float format failure");
    return std::string(buf, p);
}

inline float parse_float(std::string_view s, const std::string& where) {
    float v{};
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size()) {
        throw ParseError(where + ": bad float '" + std::string(s) + "'");
    }
    return v;
}

inline std::int64_t parse_int(std::string_view s, const std::string& where) {
    std::int64_t v{};
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size()) {
        throw ParseError(where + ": bad integer '" + std::string(s) + "'");
    }
    return v;
}

inline bool parse_bool01(std::string_view s, const std::string& where) {
    if (s == "0") return false;
    if (s == "1") return true;
    throw ParseError(where + ": bad boolean '" + std::string(s) + "' (want 0/1)");
}

inline std::vector<std::string_view> split_csv(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= line.size(); ++i) {
        if (i == line.size() || line[i] == ',') {
            out.push_back(line.substr(start, i - start));
            start = i + 1;
        }
    }
    return out;
}

// Stems: "m.events.jsonl" and "m" both name the same match pair.
inline std::string match_stem(const std::filesystem::path& path) {
    std::string s = path.string();
    if (s.size() >= kEventsSuffix.size() &&
        s.compare(s.size() - kEventsSuffix.size(), kEventsSuffix.size(), kEventsSuffix) == 0) {
        return s.substr(0, s.size() - kEventsSuffix.size());
    }
    if (s.size() >= kTicksSuffix.size() &&
        s.compare(s.size() - kTicksSuffix.size(), kTicksSuffix.size(), kTicksSuffix) == 0) {
        return s.substr(0, s.size() - kTicksSuffix.size());
    }
    return s;
}

} // namespace detail

inline void save_match(const MatchRecord& m, const std::filesystem::path& stem_path) {
    const std::string stem = detail::match_stem(stem_path);

    {
        std::ofstream out(stem + std::string(kTicksSuffix), std::ios::trunc);
        if (!out) throw ValidationError("cannot write " + stem + std::string(kTicksSuffix));
        out << kTickCsvHeader << '\n';
        for (std::int64_t t = 0; t < m.tick_count; ++t) {
            for (const auto& p : m.players) {
                const TickRow& r = m.ticks.at(p.player_id)[static_cast<std::size_t>(t)];
                out << t << ',' << p.player_id << ',' << detail::fmt_float(r.x) << ','
                    << detail::fmt_float(r.y) << ',' << detail::fmt_float(r.z) << ','
                    << detail::fmt_float(r.yaw) << ',' << detail::fmt_float(r.pitch) << ','
                    << detail::fmt_float(r.vx) << ',' << detail::fmt_float(r.vy) << ','
                    << detail::fmt_float(r.vz) << ',' << detail::fmt_float(r.health) << ','
                    << detail::fmt_float(r.armor) << ',' << (r.is_scoped ? 1 : 0) << ','
                    << (r.is_crouching ? 1 : 0) << ',' << (r.is_airborne ? 1 : 0) << ','
                    << detail::fmt_float(r.flash_duration) << ',' << (r.made_noise ? 1 : 0) << '\n';
            }
        }
    }

    {
        std::ofstream out(stem + std::string(kEventsSuffix), std::ios::trunc);
        if (!out) throw ValidationError("cannot write " + stem + std::string(kEventsSuffix));
        nlohmann::json players = nlohmann::json::array();
        for (const auto& p : m.players) {
            players.push_back({{"player_id", p.player_id}, {"is_cheater", p.is_cheater}});
        }
        nlohmann::json header = {{"match_id", m.match_id},
                                 {"map_name", m.map_name},
                                 {"tick_count", m.tick_count},
                                 {"players", players}};
        out << header.dump() << '\n';
        for (const auto& k : m.kills) {
            nlohmann::json e = {{"kill_tick", k.kill_tick},
                                {"attacker_id", k.attacker_id ? nlohmann::json(*k.attacker_id)
                                                              : nlohmann::json(nullptr)},
                                {"victim_id", k.victim_id ? nlohmann::json(*k.victim_id)
                                                          : nlohmann::json(nullptr)},
                                {"headshot", k.headshot},
                                {"through_smoke", k.through_smoke},
                                {"weapon_name", k.weapon_name}};
            out << e.dump() << '\n';
        }
    }
}

namespace detail {

inline std::optional<std::string> read_id_field(const nlohmann::json& j, const char* key) {
    if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
    std::string s = j.at(key).get<std::string>();
    if (s.empty()) return std::nullopt; // empty id == bot
    return s;
}

} // namespace detail

// Loads and fully validates one match. `path` may be the stem, the events
// file, or the ticks file.
inline MatchRecord load_match(const std::filesystem::path& path) {
    const std::string stem = detail::match_stem(path);
    const std::string events_path = stem + std::string(kEventsSuffix);
    const std::string ticks_path = stem + std::string(kTicksSuffix);

    MatchRecord m;

    // events first: the header carries the player list.
    {
        std::ifstream in(events_path);
        if (!in) throw ValidationError("cannot open " + events_path);
        std::string line;
        int lineno = 0;
        bool have_header = false;
        std::int64_t declared_ticks = -1;
        while (std::getline(in, line)) {
            ++lineno;
            if (line.empty()) continue;
            nlohmann::json j;
            try {
                j = nlohmann::json::parse(line);
            } catch (const nlohmann::json::exception& e) {
                throw ParseError(events_path + ":" + std::to_string(lineno) + ": " + e.what());
            }
            try {
                if (!have_header) {
                    m.match_id = j.at("match_id").get<std::string>();
                    m.map_name = j.at("map_name").get<std::string>();
                    if (j.contains("tick_count")) declared_ticks = j.at("tick_count").get<std::int64_t>();
                    for (const auto& pj : j.at("players")) {
                        m.players.push_back({pj.at("player_id").get<std::string>(),
                                             pj.at("is_cheater").get<bool>()});
                    }
                    have_header = true;
                } else {
                    KillEvent k;
                    k.kill_tick = j.at("kill_tick").get<std::int64_t>();
                    k.attacker_id = detail::read_id_field(j, "attacker_id");
                    k.victim_id = detail::read_id_field(j, "victim_id");
                    k.headshot = j.at("headshot").get<bool>();
                    k.through_smoke = j.at("through_smoke").get<bool>();
                    k.weapon_name = j.at("weapon_name").get<std::string>();
                    m.kills.push_back(std::move(k));
                }
            } catch (const nlohmann::json::exception& e) {
                throw ParseError(events_path + ":" + std::to_string(lineno) + ": " + e.what());
            }
        }
        if (!have_header) throw ParseError(events_path + ": missing header object");
        m.tick_count = declared_ticks; // fixed up from the CSV below if absent
    }

    {
        std::ifstream in(ticks_path);
        if (!in) throw ValidationError("cannot open " + ticks_path);
        std::string line;
        int lineno = 0;
        if (!std::getline(in, line) || line != kTickCsvHeader) {
            throw ParseError(ticks_path + ":1: bad or missing CSV header");
        }
        lineno = 1;
        std::int64_t max_tick = -1;
        // Collected as (tick -> row) per player, then checked for density.
        std::unordered_map<std::string, std::vector<std::pair<std::int64_t, TickRow>>> rows;
        while (std::getline(in, line)) {
            ++lineno;
            if (line.empty()) continue;
            const std::string where = ticks_path + ":" + std::to_string(lineno);
            const auto f = detail::split_csv(line);
            if (f.size() != 17) {
                throw ParseError(where + ": expected 17 fields, got " + std::to_string(f.size()));
            }
            const std::int64_t tick = detail::parse_int(f[0], where);
            TickRow r;
            r.x = detail::parse_float(f[2], where);
            r.y = detail::parse_float(f[3], where);
            r.z = detail::parse_float(f[4], where);
            r.yaw = detail::parse_float(f[5], where);
            r.pitch = detail::parse_float(f[6], where);
            r.vx = detail::parse_float(f[7], where);
            r.vy = detail::parse_float(f[8], where);
            r.vz = detail::parse_float(f[9], where);
            r.health = detail::parse_float(f[10], where);
            r.armor = detail::parse_float(f[11], where);
            r.is_scoped = detail::parse_bool01(f[12], where);
            r.is_crouching = detail::parse_bool01(f[13], where);
            r.is_airborne = detail::parse_bool01(f[14], where);
            r.flash_duration = detail::parse_float(f[15], where);
            r.made_noise = detail::parse_bool01(f[16], where);
            rows[std::string(f[1])].emplace_back(tick, r);
            max_tick = std::max(max_tick, tick);
        }
        if (m.tick_count < 0) m.tick_count = max_tick + 1;
        for (auto& [id, list] : rows) {
            std::stable_sort(list.begin(), list.end(),
                             [](const auto& a, const auto& b) { return a.first < b.first; });
            std::vector<TickRow> dense(static_cast<std::size_t>(std::max<std::int64_t>(m.tick_count, 0)));
            std::vector<bool> seen(dense.size(), false);
            for (const auto& [tick, row] : list) {
                if (tick < 0 || tick >= m.tick_count) {
                    throw ValidationError(ticks_path + ": tick " + std::to_string(tick) +
                                          " outside [0, " + std::to_string(m.tick_count) + ")");
                }
                if (seen[static_cast<std::size_t>(tick)]) {
                    throw ValidationError(ticks_path + ": duplicate row for (" + std::to_string(tick) +
                                          ", " + id + ")");
                }
                seen[static_cast<std::size_t>(tick)] = true;
                dense[static_cast<std::size_t>(tick)] = row;
            }
            for (std::size_t t = 0; t < seen.size(); ++t) {
                if (!seen[t]) {
                    throw ValidationError(ticks_path + ": tick table gap for player '" + id +
                                          "' at tick " + std::to_string(t));
                }
            }
            m.ticks.emplace(id, std::move(dense));
        }
    }

    validate(m);
    return m;
}

// All match stems under a directory (files ending in .events.jsonl), sorted.
inline std::vector<std::string> list_match_stems(const std::filesystem::path& dir) {
    std::vector<std::string> stems;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (!entry.is_regular_file()) continue;
        const std::string s = entry.path().string();
        if (s.size() >= kEventsSuffix.size() &&
            s.compare(s.size() - kEventsSuffix.size(), kEventsSuffix.size(), kEventsSuffix) == 0) {
            stems.push_back(s.substr(0, s.size() - kEventsSuffix.size()));
        }
    }
    std::sort(stems.begin(), stems.end());
    return stems;
}

} // namespace acpt
