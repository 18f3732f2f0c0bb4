// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>
#include <limits>

#include "acpt/features.hpp"
#include "acpt/rng.hpp"
#include "test_helpers.hpp"

using namespace acpt;

TEST_CASE("normalize maps, clamps, and rejects non-finite input") {
    CHECK(normalize(100.0, 0.0f, 100.0f) == 1.0f);
    CHECK(normalize(-9000.0, -8192.0f, 8192.0f) == 0.0f);
    CHECK(normalize(90.0, -180.0f, 180.0f) == doctest::Approx(0.75));
    CHECK(normalize(0.0, -1.0f, 1.0f) == 0.5f);
    CHECK_THROWS_AS(normalize(std::numeric_limits<double>::quiet_NaN(), 0.0f, 1.0f), NumericError);
    CHECK_THROWS_AS(normalize(std::numeric_limits<double>::infinity(), 0.0f, 1.0f), NumericError);
}

TEST_CASE("weapon names map to their documented groups") {
    CHECK(weapon_group_of("ak47") == WeaponGroup::automatic_rifle);
    CHECK(weapon_group_of("weapon_ak47") == WeaponGroup::automatic_rifle);
    CHECK(weapon_group_of("AK47") == WeaponGroup::automatic_rifle);
    CHECK(weapon_group_of("knife") == WeaponGroup::knife);
    CHECK(weapon_group_of("awp") == WeaponGroup::semi_automatic_rifle);
    CHECK(weapon_group_of("deagle") == WeaponGroup::pistol);
    CHECK(weapon_group_of("hegrenade") == WeaponGroup::grenade);
    CHECK(weapon_group_of("mp9") == WeaponGroup::submachine_gun);
    CHECK(weapon_group_of("nova") == WeaponGroup::shotgun);
    CHECK_THROWS_WITH_AS(weapon_group_of("bayonet9000"), doctest::Contains("bayonet9000"),
                         SchemaError);
}

TEST_CASE("the map table is fixed at 15 entries with stable indices") {
    CHECK(kMapCount == 15);
    CHECK(map_index("de_dust2") == 5);
    CHECK(map_index("cs_italy") == 0);
    CHECK_THROWS_AS(map_index("de_atlantis"), SchemaError);
}

TEST_CASE("the schema is 44 slots with sane bounds and a stable hash") {
    const FeatureSchema& s = FeatureSchema::standard();
    REQUIRE(s.slots.size() == 44);
    for (const auto& d : s.slots) CHECK(d.lo < d.hi);
    CHECK(s.slots[static_cast<std::size_t>(kSlotDistance)].name == "pair_distance");
    CHECK(s.slots[17].kind == "one_hot");
    CHECK(s.slots[43].name == "map_de_vertigo");
    CHECK(s.content_hash() == FeatureSchema::standard().content_hash());
    CHECK(s.to_json().at("slots").size() == 44);
}

namespace {

TickRow row_at(float x, float y, float z) {
    TickRow r;
    r.x = x;
    r.y = y;
    r.z = z;
    r.health = 80.0f;
    r.armor = 50.0f;
    return r;
}

KillEvent basic_kill(bool headshot = true, bool smoke = false) {
    KillEvent k;
    k.kill_tick = 100;
    k.attacker_id = "a";
    k.victim_id = "v";
    k.headshot = headshot;
    k.through_smoke = smoke;
    k.weapon_name = "ak47";
    return k;
}

} // namespace

TEST_CASE("encode_tick fills the documented layout") {
    const auto& schema = FeatureSchema::standard();
    const TickRow att = row_at(100.0f, 200.0f, 32.0f);
    const TickRow vic = row_at(100.0f, 200.0f, 32.0f);
    const TickVector v = encode_tick(att, vic, basic_kill(), "de_dust2", schema);

    CHECK(v[kSlotDistance] == 0.0f); // identical positions
    CHECK(v[kSlotHeadshot] == 1.0f);
    CHECK(v[kSlotThroughSmoke] == 0.0f);
    CHECK(v[kSlotWeaponOneHot + 1] == 1.0f); // automatic rifle
    CHECK(v[kSlotMapOneHot + 5] == 1.0f);    // de_dust2
    CHECK(v[kSlotAttackerHealth] == doctest::Approx(0.8));

    double weapon_sum = 0, map_sum = 0;
    for (int i = 0; i < kWeaponGroupCount; ++i) weapon_sum += v[static_cast<std::size_t>(kSlotWeaponOneHot + i)];
    for (int i = 0; i < kMapCount; ++i) map_sum += v[static_cast<std::size_t>(kSlotMapOneHot + i)];
    CHECK(weapon_sum == 1.0);
    CHECK(map_sum == 1.0);
}

TEST_CASE("encode_tick clamps out-of-range scalars instead of propagating them") {
    const auto& schema = FeatureSchema::standard();
    TickRow att = row_at(-9999.0f, 9999.0f, 0.0f);
    att.vx = 1000.0f;
    att.flash_duration = 12.0f;
    const TickVector v = encode_tick(att, row_at(0, 0, 0), basic_kill(), "de_nuke", schema);
    for (float x : v) {
        CHECK(x >= 0.0f);
        CHECK(x <= 1.0f);
    }
    CHECK(v[kSlotAttackerX] == 0.0f);
    CHECK(v[kSlotAttackerY] == 1.0f);
    CHECK(v[kSlotAttackerVx] == 1.0f);
    CHECK(v[kSlotAttackerFlash] == 1.0f);
}

TEST_CASE("encode_tick is pure and the one-hot property holds on random input") {
    const auto& schema = FeatureSchema::standard();
    CounterRng rng(404);
    for (int it = 0; it < 50; ++it) {
        TickRow att = row_at(static_cast<float>(rng.uniform(-8000, 8000)),
                             static_cast<float>(rng.uniform(-8000, 8000)),
                             static_cast<float>(rng.uniform(-100, 400)));
        att.yaw = static_cast<float>(rng.uniform(-180, 180));
        att.health = static_cast<float>(rng.uniform(0, 100));
        const TickRow vic = row_at(static_cast<float>(rng.uniform(-8000, 8000)),
                                   static_cast<float>(rng.uniform(-8000, 8000)), 0.0f);
        KillEvent k = basic_kill(rng.bernoulli(0.5), rng.bernoulli(0.5));
        k.weapon_name = rng.bernoulli(0.5) ? "awp" : "glock";
        const std::string map(kMapTable[rng.below(kMapTable.size())]);

        const TickVector a = encode_tick(att, vic, k, map, schema);
        const TickVector b = encode_tick(att, vic, k, map, schema);
        CHECK(a == b);

        double wsum = 0, msum = 0;
        for (int i = 0; i < kWeaponGroupCount; ++i) wsum += a[static_cast<std::size_t>(kSlotWeaponOneHot + i)];
        for (int i = 0; i < kMapCount; ++i) msum += a[static_cast<std::size_t>(kSlotMapOneHot + i)];
        CHECK(wsum == 1.0);
        CHECK(msum == 1.0);
        for (float x : a) {
            CHECK(x >= 0.0f);
            CHECK(x <= 1.0f);
        }
    }
}

TEST_CASE("distance slot is symmetric and translation invariant") {
    const auto& schema = FeatureSchema::standard();
    // Quarter-unit coordinates keep +16 translation exact in float.
    const TickRow a = row_at(123.25f, -456.5f, 32.0f);
    const TickRow b = row_at(789.75f, 321.25f, 64.0f);
    const auto at_pos = [&](const TickRow& p, const TickRow& q) {
        return encode_tick(p, q, basic_kill(), "de_train", schema)[kSlotDistance];
    };
    CHECK(at_pos(a, b) == at_pos(b, a));

    TickRow a2 = a, b2 = b;
    for (TickRow* r : {&a2, &b2}) {
        r->x += 16.0f;
        r->y += 16.0f;
        r->z += 16.0f;
    }
    CHECK(at_pos(a, b) == at_pos(a2, b2));
}
