// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>
#include <set>

#include "acpt/rng.hpp"
#include "acpt/toml.hpp"

using namespace acpt;

TEST_CASE("counter rng is a pure function of (key, counter)") {
    CounterRng a(CounterRng::derive_key(42, 1, 2));
    CounterRng b(CounterRng::derive_key(42, 1, 2));
    for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());

    CounterRng c(CounterRng::derive_key(42, 1, 3));
    CHECK(CounterRng(CounterRng::derive_key(42, 1, 2)).next_u64() != c.next_u64());
}

TEST_CASE("uniform doubles stay in [0,1) with sane mean") {
    CounterRng rng(123);
    double sum = 0;
    for (int i = 0; i < 20000; ++i) {
        const double u = rng.next_double();
        REQUIRE(u >= 0.0);
        REQUIRE(u < 1.0);
        sum += u;
    }
    CHECK(std::abs(sum / 20000 - 0.5) < 0.02);
}

TEST_CASE("gaussian draws have roughly the right moments") {
    CounterRng rng(7);
    double sum = 0, sq = 0;
    const int n = 20000;
    for (int i = 0; i < n; ++i) {
        const double g = rng.gaussian(0.0, 5.0);
        sum += g;
        sq += g * g;
    }
    const double mean = sum / n;
    const double var = sq / n - mean * mean;
    CHECK(std::abs(mean) < 0.2);
    CHECK(std::abs(std::sqrt(var) - 5.0) < 0.2);
}

TEST_CASE("deterministic shuffle is a permutation and reproducible") {
    std::vector<int> v(100), w(100);
    for (int i = 0; i < 100; ++i) v[static_cast<std::size_t>(i)] = w[static_cast<std::size_t>(i)] = i;
    CounterRng r1(99), r2(99);
    deterministic_shuffle(v, r1);
    deterministic_shuffle(w, r2);
    CHECK(v == w);
    CHECK(std::set<int>(v.begin(), v.end()).size() == 100);
    std::vector<int> u(100);
    for (int i = 0; i < 100; ++i) u[static_cast<std::size_t>(i)] = i;
    CHECK(v != u); // overwhelmingly likely
}

TEST_CASE("toml subset parses sections, types and comments") {
    const auto t = TomlTable::parse(R"(
# run config
[train]
batch_size = 128
base_lr = 1e-4   # scientific notation
seed = 42
name = "baseline run"
resume = false

[augment]
sigma = 5.0
)");
    CHECK(t.get_int("train.batch_size") == 128);
    CHECK(t.get_double("train.base_lr") == doctest::Approx(1e-4));
    CHECK(t.get_int("train.seed") == 42);
    CHECK(t.get_string("train.name") == "baseline run");
    CHECK_FALSE(t.get_bool("train.resume"));
    CHECK(t.get_double("augment.sigma") == doctest::Approx(5.0));
    CHECK_FALSE(t.contains("train.missing"));
}

TEST_CASE("toml errors carry position and kind") {
    CHECK_THROWS_AS(TomlTable::parse("key value"), ParseError);
    CHECK_THROWS_AS(TomlTable::parse("s = \"unterminated"), ParseError);
    CHECK_THROWS_AS(TomlTable::parse("x = @!?"), ParseError);
    const auto t = TomlTable::parse("x = 1");
    CHECK_THROWS_AS(t.get_string("x"), ParseError);
    CHECK_THROWS_AS(t.get_int("nope"), ParseError);
}
