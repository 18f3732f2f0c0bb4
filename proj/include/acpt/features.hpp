// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "acpt/common.hpp"
#include "acpt/hash.hpp"
#include "acpt/match.hpp"
#include "acpt/tables.hpp"

namespace acpt {

inline constexpr int kTickVectorSize = 44;

using TickVector = std::array<float, kTickVectorSize>;

// Fixed slot layout of the 44-value tick vector:
//   0..13   attacker state: x y z, yaw pitch, vx vy vz, health armor,
//           is_scoped is_crouching is_airborne, flash_duration
//   14..15  kill attributes: headshot, through_smoke
//   16      attacker-victim 3-D distance
//   17..23  weapon group one-hot
//   24..28  victim state: x y z, health, made_noise
//   29..43  map one-hot
enum Slot : int {
    kSlotAttackerX = 0,
    kSlotAttackerY = 1,
    kSlotAttackerZ = 2,
    kSlotAttackerYaw = 3,
    kSlotAttackerPitch = 4,
    kSlotAttackerVx = 5,
    kSlotAttackerVy = 6,
    kSlotAttackerVz = 7,
    kSlotAttackerHealth = 8,
    kSlotAttackerArmor = 9,
    kSlotAttackerScoped = 10,
    kSlotAttackerCrouching = 11,
    kSlotAttackerAirborne = 12,
    kSlotAttackerFlash = 13,
    kSlotHeadshot = 14,
    kSlotThroughSmoke = 15,
    kSlotDistance = 16,
    kSlotWeaponOneHot = 17, // ..23
    kSlotVictimX = 24,
    kSlotVictimY = 25,
    kSlotVictimZ = 26,
    kSlotVictimHealth = 27,
    kSlotVictimMadeNoise = 28,
    kSlotMapOneHot = 29, // ..43
};

// Fixed normalization bounds. Inference stays deterministic because nothing
// here is fitted to data.
inline constexpr float kCoordBound = 8192.0f;
inline constexpr float kVelocityBound = 450.0f;
inline constexpr float kFlashBound = 5.0f;
inline constexpr float kDistanceBound = 8192.0f;

struct SlotDesc {
    std::string name;
    std::string source; // attacker | kill | victim | map
    std::string kind;   // scalar | one_hot
    float lo = 0.0f;
    float hi = 1.0f;
};

struct FeatureSchema {
    std::vector<SlotDesc> slots;

    static const FeatureSchema& standard();

    nlohmann::json to_json() const;
    std::uint64_t content_hash() const;
};

inline float normalize(double value, float lo, float hi) {
    if (!std::isfinite(value)) throw NumericError("normalize: non-finite input");
    const double u = (value - static_cast<double>(lo)) / (static_cast<double>(hi) - lo);
    return static_cast<float>(std::clamp(u, 0.0, 1.0));
}

inline const FeatureSchema& FeatureSchema::standard() {
    static const FeatureSchema schema = [] {
        FeatureSchema s;
        auto scalar = [&](const std::string& name, const std::string& source, float lo, float hi) {
            s.slots.push_back({name, source, "scalar", lo, hi});
        };
        auto flag = [&](const std::string& name, const std::string& source) {
            scalar(name, source, 0.0f, 1.0f);
        };
        scalar("attacker_x", "attacker", -kCoordBound, kCoordBound);
        scalar("attacker_y", "attacker", -kCoordBound, kCoordBound);
        scalar("attacker_z", "attacker", -kCoordBound, kCoordBound);
        scalar("attacker_yaw", "attacker", -180.0f, 180.0f);
        scalar("attacker_pitch", "attacker", -90.0f, 90.0f);
        scalar("attacker_vx", "attacker", -kVelocityBound, kVelocityBound);
        scalar("attacker_vy", "attacker", -kVelocityBound, kVelocityBound);
        scalar("attacker_vz", "attacker", -kVelocityBound, kVelocityBound);
        scalar("attacker_health", "attacker", 0.0f, 100.0f);
        scalar("attacker_armor", "attacker", 0.0f, 100.0f);
        flag("attacker_is_scoped", "attacker");
        flag("attacker_is_crouching", "attacker");
        flag("attacker_is_airborne", "attacker");
        scalar("attacker_flash_duration", "attacker", 0.0f, kFlashBound);
        flag("kill_headshot", "kill");
        flag("kill_through_smoke", "kill");
        scalar("pair_distance", "kill", 0.0f, kDistanceBound);
        for (auto g : kWeaponGroupNames) {
            s.slots.push_back({"weapon_" + std::string(g), "kill", "one_hot", 0.0f, 1.0f});
        }
        scalar("victim_x", "victim", -kCoordBound, kCoordBound);
        scalar("victim_y", "victim", -kCoordBound, kCoordBound);
        scalar("victim_z", "victim", -kCoordBound, kCoordBound);
        scalar("victim_health", "victim", 0.0f, 100.0f);
        flag("victim_made_noise", "victim");
        for (auto mname : kMapTable) {
            s.slots.push_back({"map_" + std::string(mname), "map", "one_hot", 0.0f, 1.0f});
        }
        return s;
    }();
    return schema;
}

inline nlohmann::json FeatureSchema::to_json() const {
    nlohmann::json slots_j = nlohmann::json::array();
    for (std::size_t i = 0; i < slots.size(); ++i) {
        const auto& d = slots[i];
        slots_j.push_back({{"index", i},
                           {"name", d.name},
                           {"source", d.source},
                           {"kind", d.kind},
                           {"lo", d.lo},
                           {"hi", d.hi}});
    }
    nlohmann::json weapons = nlohmann::json::array();
    for (auto g : kWeaponGroupNames) weapons.push_back(std::string(g));
    nlohmann::json maps = nlohmann::json::array();
    for (auto mname : kMapTable) maps.push_back(std::string(mname));
    return nlohmann::json{{"format", "acpt-feature-schema"},
                          {"version", 1},
                          {"slots", slots_j},
                          {"weapon_groups", weapons},
                          {"maps", maps}};
}

inline std::uint64_t FeatureSchema::content_hash() const { return fnv1a64(to_json().dump()); }

inline double pair_distance(const TickRow& a, const TickRow& b) {
    const double dx = static_cast<double>(a.x) - b.x;
    const double dy = static_cast<double>(a.y) - b.y;
    const double dz = static_cast<double>(a.z) - b.z;
    return std::sqrt(dx * dx + dy * dy + dz * dz);
}

// Builds one normalized 44-value vector for a (attacker, victim, kill, map)
// tuple. Pure: identical inputs give identical outputs.
inline TickVector encode_tick(const TickRow& attacker, const TickRow& victim, const KillEvent& kill,
                              const std::string& map_name, const FeatureSchema& schema) {
    const auto& sl = schema.slots;
    const int map_slot = map_index(map_name);           // validates map
    const int weapon = static_cast<int>(weapon_group_of(kill.weapon_name));

    TickVector v{};
    auto put = [&](int slot, double raw) {
        v[static_cast<std::size_t>(slot)] =
            normalize(raw, sl[static_cast<std::size_t>(slot)].lo, sl[static_cast<std::size_t>(slot)].hi);
    };

    put(kSlotAttackerX, attacker.x);
    put(kSlotAttackerY, attacker.y);
    put(kSlotAttackerZ, attacker.z);
    put(kSlotAttackerYaw, attacker.yaw);
    put(kSlotAttackerPitch, attacker.pitch);
    put(kSlotAttackerVx, attacker.vx);
    put(kSlotAttackerVy, attacker.vy);
    put(kSlotAttackerVz, attacker.vz);
    put(kSlotAttackerHealth, attacker.health);
    put(kSlotAttackerArmor, attacker.armor);
    put(kSlotAttackerScoped, attacker.is_scoped ? 1.0 : 0.0);
    put(kSlotAttackerCrouching, attacker.is_crouching ? 1.0 : 0.0);
    put(kSlotAttackerAirborne, attacker.is_airborne ? 1.0 : 0.0);
    put(kSlotAttackerFlash, attacker.flash_duration);
    put(kSlotHeadshot, kill.headshot ? 1.0 : 0.0);
    put(kSlotThroughSmoke, kill.through_smoke ? 1.0 : 0.0);
    put(kSlotDistance, pair_distance(attacker, victim));
    v[static_cast<std::size_t>(kSlotWeaponOneHot + weapon)] = 1.0f;
    put(kSlotVictimX, victim.x);
    put(kSlotVictimY, victim.y);
    put(kSlotVictimZ, victim.z);
    put(kSlotVictimHealth, victim.health);
    put(kSlotVictimMadeNoise, victim.made_noise ? 1.0 : 0.0);
    v[static_cast<std::size_t>(kSlotMapOneHot + map_slot)] = 1.0f;
    return v;
}

} // namespace acpt
