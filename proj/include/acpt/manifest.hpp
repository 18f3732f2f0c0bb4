// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "acpt/common.hpp"
#include "acpt/hash.hpp"
#include "acpt/version.hpp"

namespace acpt {

// One manifest.json per output directory, recording how the artifacts in it
// were produced. Timing fields are informational and excluded from any
// determinism comparison.
struct RunManifest {
    std::string command;
    nlohmann::json config = nlohmann::json::object();
    std::vector<std::pair<std::string, std::uint32_t>> inputs;  // path, crc32
    std::vector<std::pair<std::string, std::uint32_t>> outputs;
    std::vector<std::uint64_t> seeds;
    double wall_ms = 0;

    nlohmann::json to_json() const {
        auto files = [](const std::vector<std::pair<std::string, std::uint32_t>>& v) {
            nlohmann::json arr = nlohmann::json::array();
            for (const auto& [path, crc] : v) arr.push_back({{"path", path}, {"crc32", crc}});
            return arr;
        };
        return {{"tool_version", kVersion}, {"command", command},      {"config", config},
                {"inputs", files(inputs)},  {"outputs", files(outputs)}, {"seeds", seeds},
                {"timing", {{"wall_ms", wall_ms}}}};
    }
};

inline std::uint32_t file_crc32(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open for hashing: " + path.string());
    Crc32 crc;
    char buf[1 << 16];
    while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
        crc.update(buf, static_cast<std::size_t>(in.gcount()));
        if (!in) break;
    }
    return crc.value();
}

// Writes <dir>/manifest.json (exactly one manifest per output directory).
inline void write_manifest(const std::filesystem::path& out_dir, const RunManifest& m) {
    std::filesystem::create_directories(out_dir);
    std::ofstream out(out_dir / "manifest.json", std::ios::trunc);
    if (!out) throw ValidationError("cannot write manifest in " + out_dir.string());
    out << m.to_json().dump(2) << '\n';
}

} // namespace acpt
