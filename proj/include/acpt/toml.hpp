// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <charconv>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>

#include "acpt/common.hpp"

namespace acpt {

// Minimal TOML subset: [sections], key = value with string/bool/int/float
// values, '#' comments. Enough for run configs; nested tables and arrays are
// out of scope.
class TomlTable {
public:
    static TomlTable parse(std::string_view text, const std::string& source = "<toml>") {
        TomlTable t;
        std::string section;
        std::size_t lineno = 0;
        std::size_t pos = 0;
        while (pos <= text.size()) {
            const std::size_t eol = text.find('\n', pos);
            std::string_view line = text.substr(pos, eol == std::string_view::npos ? std::string_view::npos : eol - pos);
            pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
            ++lineno;

            if (const auto hash = find_comment(line); hash != std::string_view::npos) {
                line = line.substr(0, hash);
            }
            line = trim(line);
            if (line.empty()) continue;

            const std::string where = source + ":" + std::to_string(lineno);
            if (line.front() == '[') {
                if (line.back() != ']') throw ParseError(where + ": unterminated section header");
                section = std::string(trim(line.substr(1, line.size() - 2)));
                if (section.empty()) throw ParseError(where + ": empty section name");
                continue;
            }
            const std::size_t eq = line.find('=');
            if (eq == std::string_view::npos) throw ParseError(where + ": expected key = value");
            const std::string key(trim(line.substr(0, eq)));
            const std::string_view raw = trim(line.substr(eq + 1));
            if (key.empty() || raw.empty()) throw ParseError(where + ": empty key or value");
            const std::string full = section.empty() ? key : section + "." + key;
            t.values_[full] = parse_value(raw, where);
        }
        return t;
    }

    static TomlTable parse_file(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw ValidationError("cannot open config: " + path);
        std::stringstream ss;
        ss << in.rdbuf();
        return parse(ss.str(), path);
    }

    bool contains(const std::string& key) const { return values_.count(key) > 0; }

    std::string get_string(const std::string& key) const {
        const Value& v = at(key);
        if (v.kind != Kind::string) throw ParseError("config key '" + key + "' is not a string");
        return v.str;
    }

    bool get_bool(const std::string& key) const {
        const Value& v = at(key);
        if (v.kind != Kind::boolean) throw ParseError("config key '" + key + "' is not a boolean");
        return v.num != 0;
    }

    std::int64_t get_int(const std::string& key) const {
        const Value& v = at(key);
        if (v.kind != Kind::integer) throw ParseError("config key '" + key + "' is not an integer");
        return static_cast<std::int64_t>(v.num);
    }

    double get_double(const std::string& key) const {
        const Value& v = at(key);
        if (v.kind == Kind::integer || v.kind == Kind::floating) return v.num;
        throw ParseError("config key '" + key + "' is not a number");
    }

    template <typename T, typename Getter>
    void maybe(const std::string& key, T& out, Getter&& get) const {
        if (contains(key)) out = static_cast<T>((this->*get)(key));
    }

private:
    enum class Kind { string, boolean, integer, floating };
    struct Value {
        Kind kind;
        std::string str;
        double num = 0;
    };

    static std::string_view trim(std::string_view s) {
        while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) {
            s.remove_prefix(1);
        }
        while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
            s.remove_suffix(1);
        }
        return s;
    }

    // '#' starts a comment unless inside a quoted string.
    static std::size_t find_comment(std::string_view line) {
        bool in_str = false;
        for (std::size_t i = 0; i < line.size(); ++i) {
            if (line[i] == '"') in_str = !in_str;
            if (line[i] == '#' && !in_str) return i;
        }
        return std::string_view::npos;
    }

    static Value parse_value(std::string_view raw, const std::string& where) {
        if (raw.front() == '"') {
            if (raw.size() < 2 || raw.back() != '"') {
                throw ParseError(where + ": unterminated string");
            }
            return {Kind::string, std::string(raw.substr(1, raw.size() - 2)), 0};
        }
        if (raw == "true") return {Kind::boolean, "", 1};
        if (raw == "false") return {Kind::boolean, "", 0};
        // integer?
        {
            std::int64_t iv{};
            auto [p, ec] = std::from_chars(raw.data(), raw.data() + raw.size(), iv);
            if (ec == std::errc{} && p == raw.data() + raw.size()) {
                return {Kind::integer, "", static_cast<double>(iv)};
            }
        }
        {
            double dv{};
            auto [p, ec] = std::from_chars(raw.data(), raw.data() + raw.size(), dv);
            if (ec == std::errc{} && p == raw.data() + raw.size()) {
                return {Kind::floating, "", dv};
            }
        }
        throw ParseError(where + ": cannot parse value '" + std::string(raw) + "'");
    }

    const Value& at(const std::string& key) const {
        auto it = values_.find(key);
        if (it == values_.end()) throw ParseError("missing config key '" + key + "'");
        return it->second;
    }

    std::map<std::string, Value> values_;
};

} // namespace acpt
