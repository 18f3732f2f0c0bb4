// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <set>
#include <string>
#include <vector>

#include "acpt/binio.hpp"
#include "acpt/common.hpp"
#include "acpt/features.hpp"
#include "acpt/rng.hpp"
#include "acpt/windowing.hpp"

namespace acpt {

inline constexpr std::string_view kDatasetMagic = "ACPTWND1";
inline constexpr std::uint32_t kDatasetVersion = 1;

struct SplitSpec {
    double train = 0.70;
    double val = 0.15;
    double test = 0.15;
    std::uint64_t seed = 0;

    void validate() const {
        if (train < 0 || val < 0 || test < 0) throw ValidationError("split: negative ratio");
        if (std::abs(train + val + test - 1.0) > 1e-9) {
            throw ValidationError("split: ratios must sum to 1");
        }
    }
};

struct SplitResult {
    WindowSet train, val, test;
};

namespace detail {

// Largest-remainder apportionment of M matches over the three ratios; every
// set lands within one match of its exact fractional share. Ties favour
// train, then val.
inline std::array<std::size_t, 3> apportion_matches(std::size_t m, const SplitSpec& spec) {
    const std::array<double, 3> targets = {spec.train * static_cast<double>(m),
                                           spec.val * static_cast<double>(m),
                                           spec.test * static_cast<double>(m)};
    std::array<std::size_t, 3> counts{};
    std::array<double, 3> fracs{};
    std::size_t assigned = 0;
    for (int i = 0; i < 3; ++i) {
        counts[static_cast<std::size_t>(i)] = static_cast<std::size_t>(std::floor(targets[static_cast<std::size_t>(i)]));
        fracs[static_cast<std::size_t>(i)] = targets[static_cast<std::size_t>(i)] - static_cast<double>(counts[static_cast<std::size_t>(i)]);
        assigned += counts[static_cast<std::size_t>(i)];
    }
    std::array<int, 3> order = {0, 1, 2};
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        return fracs[static_cast<std::size_t>(a)] > fracs[static_cast<std::size_t>(b)];
    });
    for (std::size_t r = 0; r < m - assigned; ++r) {
        ++counts[static_cast<std::size_t>(order[r % 3])];
    }
    return counts;
}

} // namespace detail

// Match-keyed split: every window follows its match, so no match ever spans
// two sets. Splitting happens before augmentation; augmented inputs are
// rejected, which also guarantees augmentation can never leak into a test
// set through this path.
inline SplitResult split_by_match(const WindowSet& windows, const SplitSpec& spec) {
    spec.validate();
    std::set<std::string> ids;
    for (const auto& w : windows.windows) {
        if (w.augmented) throw ValidationError("split: input contains augmented windows");
        if (w.match_id.empty()) throw ValidationError("split: window without match_id");
        ids.insert(w.match_id);
    }
    if (ids.size() < 3) throw ValidationError("split: need at least 3 matches");

    std::vector<std::string> order(ids.begin(), ids.end()); // sorted, then shuffled
    CounterRng rng(CounterRng::derive_key(spec.seed, 0x73706c6974ull));
    deterministic_shuffle(order, rng);

    const auto counts = detail::apportion_matches(order.size(), spec);
    // Shuffled order is consumed as: val, test, then train.
    std::unordered_map<std::string, int> dest; // 0 train, 1 val, 2 test
    std::size_t pos = 0;
    for (std::size_t i = 0; i < counts[1]; ++i) dest[order[pos++]] = 1;
    for (std::size_t i = 0; i < counts[2]; ++i) dest[order[pos++]] = 2;
    for (; pos < order.size(); ++pos) dest[order[pos]] = 0;

    SplitResult out;
    out.train.schema_hash = out.val.schema_hash = out.test.schema_hash = windows.schema_hash;
    for (const auto& w : windows.windows) {
        switch (dest.at(w.match_id)) {
            case 0: out.train.add(w); break;
            case 1: out.val.add(w); break;
            default: out.test.add(w); break;
        }
    }
    return out;
}

// Guard used by evaluation entry points: test data must be augmentation-free.
inline void require_unaugmented(const WindowSet& ws, const std::string& context) {
    for (const auto& w : ws.windows) {
        if (w.augmented) throw ValidationError(context + ": augmented window present");
    }
}

// ---------------------------------------------------------------------------
// Dataset files. Layout (all little-endian, documented in docs/formats.md):
//   "ACPTWND1" | u32 version | u64 schema_hash | u32 rows | u32 cols |
//   u64 count | u64 count_label0 | u64 count_label1 | windows... | u32 crc32
// Window: str16 match_id | str16 attacker_id | i64 kill_tick |
//   u8 label | u8 padded | u8 augmented | u8 clamped | rows*cols f32
// ---------------------------------------------------------------------------

inline void save_dataset(const WindowSet& ws, const std::filesystem::path& path) {
    BinWriter w;
    w.bytes(kDatasetMagic);
    w.u32(kDatasetVersion);
    w.u64(ws.schema_hash);
    const std::uint32_t rows = ws.windows.empty() ? kDefaultWindowSpec.rows
                                                  : static_cast<std::uint32_t>(ws.windows[0].rows);
    w.u32(rows);
    w.u32(kTickVectorSize);
    w.u64(ws.windows.size());
    w.u64(static_cast<std::uint64_t>(ws.label_counts[0]));
    w.u64(static_cast<std::uint64_t>(ws.label_counts[1]));
    for (const auto& win : ws.windows) {
        if (static_cast<std::uint32_t>(win.rows) != rows || win.cols != kTickVectorSize) {
            throw ValidationError("save_dataset: inconsistent window shape");
        }
        w.str16(win.match_id);
        w.str16(win.attacker_id);
        w.i64(win.kill_tick);
        w.u8(static_cast<std::uint8_t>(win.label));
        w.u8(win.padded ? 1 : 0);
        w.u8(win.augmented ? 1 : 0);
        w.u8(win.clamped ? 1 : 0);
        for (double v : win.values) w.f32(static_cast<float>(v));
    }
    w.finish_to_file(path);
}

inline WindowSet load_dataset(const std::filesystem::path& path,
                              const FeatureSchema& schema = FeatureSchema::standard()) {
    BinReader r = BinReader::from_file(path);
    if (r.raw(kDatasetMagic.size()) != kDatasetMagic) {
        throw ParseError(path.string() + ": not a window dataset (bad magic)");
    }
    const std::uint32_t version = r.u32();
    if (version != kDatasetVersion) {
        throw CompatibilityError(path.string() + ": unsupported dataset version " +
                                 std::to_string(version));
    }
    WindowSet ws;
    ws.schema_hash = r.u64();
    if (ws.schema_hash != schema.content_hash()) {
        throw CompatibilityError(path.string() + ": schema hash mismatch");
    }
    const std::uint32_t rows = r.u32();
    const std::uint32_t cols = r.u32();
    if (cols != kTickVectorSize) {
        throw CompatibilityError(path.string() + ": unexpected column count");
    }
    const std::uint64_t count = r.u64();
    const std::int64_t c0 = static_cast<std::int64_t>(r.u64());
    const std::int64_t c1 = static_cast<std::int64_t>(r.u64());
    ws.windows.reserve(count);
    for (std::uint64_t i = 0; i < count; ++i) {
        ContextWindow w;
        w.rows = static_cast<int>(rows);
        w.cols = static_cast<int>(cols);
        w.match_id = r.str16();
        w.attacker_id = r.str16();
        w.kill_tick = r.i64();
        w.label = r.u8();
        if (w.label != 0 && w.label != 1) {
            throw IntegrityError(path.string() + ": invalid label byte");
        }
        w.padded = r.u8() != 0;
        w.augmented = r.u8() != 0;
        w.clamped = r.u8() != 0;
        w.values.resize(static_cast<std::size_t>(rows) * cols);
        for (auto& v : w.values) v = static_cast<double>(r.f32());
        ws.add(std::move(w));
    }
    r.expect_end();
    if (ws.label_counts[0] != c0 || ws.label_counts[1] != c1) {
        throw IntegrityError(path.string() + ": header label counts disagree with body");
    }
    return ws;
}

// Deterministic epoch batching: a (seed, epoch)-keyed permutation chunked
// into batch_size groups, last batch smaller.
inline std::vector<std::vector<std::size_t>> batch_iter(std::size_t n_windows, int batch_size,
                                                        std::uint64_t seed, int epoch) {
    if (batch_size < 1) throw ValidationError("batch_iter: batch_size must be >= 1");
    std::vector<std::size_t> perm(n_windows);
    for (std::size_t i = 0; i < n_windows; ++i) perm[i] = i;
    CounterRng rng(CounterRng::derive_key(seed, 0x62617463686573ull, static_cast<std::uint64_t>(epoch)));
    deterministic_shuffle(perm, rng);

    std::vector<std::vector<std::size_t>> batches;
    for (std::size_t b = 0; b < n_windows; b += static_cast<std::size_t>(batch_size)) {
        const std::size_t e = std::min(n_windows, b + static_cast<std::size_t>(batch_size));
        batches.emplace_back(perm.begin() + static_cast<std::ptrdiff_t>(b),
                             perm.begin() + static_cast<std::ptrdiff_t>(e));
    }
    return batches;
}

} // namespace acpt
