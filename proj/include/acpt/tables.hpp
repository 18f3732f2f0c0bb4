// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>

#include "acpt/common.hpp"

namespace acpt {

// Weapon groups, in fixed slot order. The one-hot block of the tick vector
// follows this exact enumeration order.
enum class WeaponGroup : int {
    knife = 0,
    automatic_rifle = 1,
    semi_automatic_rifle = 2,
    pistol = 3,
    grenade = 4,
    submachine_gun = 5,
    shotgun = 6,
};

inline constexpr int kWeaponGroupCount = 7;

inline constexpr std::array<std::string_view, kWeaponGroupCount> kWeaponGroupNames = {
    "knife",          "automatic_rifle", "semi_automatic_rifle", "pistol",
    "grenade",        "submachine_gun",  "shotgun",
};

// The 15 supported maps, alphabetical; indices are stable and versioned via
// the schema hash. Unknown maps are rejected rather than bucketed.
inline constexpr std::array<std::string_view, 15> kMapTable = {
    "cs_italy",  "cs_office",  "de_ancient", "de_anubis", "de_basalt",
    "de_dust2",  "de_edin",    "de_inferno", "de_mills",  "de_mirage",
    "de_nuke",   "de_overpass", "de_thera",  "de_train",  "de_vertigo",
};

inline constexpr int kMapCount = static_cast<int>(kMapTable.size());

inline std::optional<int> try_map_index(std::string_view name) {
    for (int i = 0; i < kMapCount; ++i) {
        if (kMapTable[static_cast<std::size_t>(i)] == name) return i;
    }
    return std::nullopt;
}

inline int map_index(std::string_view name) {
    if (auto i = try_map_index(name)) return *i;
    throw SchemaError("unknown map: " + std::string(name));
}

inline bool is_supported_map(std::string_view name) { return try_map_index(name).has_value(); }

namespace detail {

// Exact-name weapon table. Names are matched after lowercasing and stripping
// an optional "weapon_" prefix; there is no fuzzy matching.
inline const std::unordered_map<std::string_view, WeaponGroup>& weapon_table() {
    static const std::unordered_map<std::string_view, WeaponGroup> t = {
        // knives (base names and the common premium variants)
        {"knife", WeaponGroup::knife},
        {"knife_t", WeaponGroup::knife},
        {"knifegg", WeaponGroup::knife},
        {"bayonet", WeaponGroup::knife},
        {"knife_bayonet", WeaponGroup::knife},
        {"knife_butterfly", WeaponGroup::knife},
        {"knife_falchion", WeaponGroup::knife},
        {"knife_flip", WeaponGroup::knife},
        {"knife_gut", WeaponGroup::knife},
        {"knife_karambit", WeaponGroup::knife},
        {"knife_m9_bayonet", WeaponGroup::knife},
        {"knife_push", WeaponGroup::knife},
        {"knife_survival_bowie", WeaponGroup::knife},
        {"knife_tactical", WeaponGroup::knife},
        {"knife_ursus", WeaponGroup::knife},
        {"knife_gypsy_jackknife", WeaponGroup::knife},
        {"knife_stiletto", WeaponGroup::knife},
        {"knife_widowmaker", WeaponGroup::knife},
        {"knife_css", WeaponGroup::knife},
        {"knife_cord", WeaponGroup::knife},
        {"knife_canis", WeaponGroup::knife},
        {"knife_outdoor", WeaponGroup::knife},
        {"knife_skeleton", WeaponGroup::knife},
        {"knife_kukri", WeaponGroup::knife},
        // automatic rifles (incl. the belt-fed machine guns)
        {"ak47", WeaponGroup::automatic_rifle},
        {"m4a1", WeaponGroup::automatic_rifle},
        {"m4a1_silencer", WeaponGroup::automatic_rifle},
        {"m4a4", WeaponGroup::automatic_rifle},
        {"aug", WeaponGroup::automatic_rifle},
        {"sg556", WeaponGroup::automatic_rifle},
        {"famas", WeaponGroup::automatic_rifle},
        {"galilar", WeaponGroup::automatic_rifle},
        {"m249", WeaponGroup::automatic_rifle},
        {"negev", WeaponGroup::automatic_rifle},
        // semi-automatic rifles (sniper and marksman rifles)
        {"awp", WeaponGroup::semi_automatic_rifle},
        {"ssg08", WeaponGroup::semi_automatic_rifle},
        {"scar20", WeaponGroup::semi_automatic_rifle},
        {"g3sg1", WeaponGroup::semi_automatic_rifle},
        // pistols
        {"deagle", WeaponGroup::pistol},
        {"glock", WeaponGroup::pistol},
        {"usp_silencer", WeaponGroup::pistol},
        {"hkp2000", WeaponGroup::pistol},
        {"p250", WeaponGroup::pistol},
        {"fiveseven", WeaponGroup::pistol},
        {"tec9", WeaponGroup::pistol},
        {"cz75a", WeaponGroup::pistol},
        {"elite", WeaponGroup::pistol},
        {"revolver", WeaponGroup::pistol},
        {"taser", WeaponGroup::pistol},
        // grenades ("inferno" is the burn damage source of molotov/incendiary)
        {"hegrenade", WeaponGroup::grenade},
        {"flashbang", WeaponGroup::grenade},
        {"smokegrenade", WeaponGroup::grenade},
        {"molotov", WeaponGroup::grenade},
        {"incgrenade", WeaponGroup::grenade},
        {"decoy", WeaponGroup::grenade},
        {"inferno", WeaponGroup::grenade},
        // submachine guns
        {"mp9", WeaponGroup::submachine_gun},
        {"mac10", WeaponGroup::submachine_gun},
        {"mp7", WeaponGroup::submachine_gun},
        {"mp5sd", WeaponGroup::submachine_gun},
        {"ump45", WeaponGroup::submachine_gun},
        {"p90", WeaponGroup::submachine_gun},
        {"bizon", WeaponGroup::submachine_gun},
        // shotguns
        {"nova", WeaponGroup::shotgun},
        {"xm1014", WeaponGroup::shotgun},
        {"sawedoff", WeaponGroup::shotgun},
        {"mag7", WeaponGroup::shotgun},
    };
    return t;
}

inline std::string normalize_weapon_name(std::string_view name) {
    std::string s(name);
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (s.rfind("weapon_", 0) == 0) s.erase(0, 7);
    return s;
}

} // namespace detail

inline WeaponGroup weapon_group_of(std::string_view weapon_name) {
    const std::string key = detail::normalize_weapon_name(weapon_name);
    const auto& t = detail::weapon_table();
    auto it = t.find(key);
    if (it == t.end()) throw SchemaError("unknown weapon: " + std::string(weapon_name));
    return it->second;
}

} // namespace acpt
