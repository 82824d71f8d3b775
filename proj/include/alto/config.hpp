#pragma once

// Flat key-value text files:
//
//   # comment
//   surface.speed_x_cm_per_s = 45014
//
// Keys are namespaced with dots. Later assignments override earlier ones.

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <string_view>

#include "alto/error.hpp"

namespace alto {

inline std::string_view trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

class KeyValues {
public:
    static KeyValues parse(std::string_view text) {
        KeyValues kv;
        std::size_t line_no = 0;
        while (!text.empty()) {
            const auto nl = text.find('\n');
            std::string_view line = text.substr(0, nl);
            text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
            ++line_no;
            if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
            line = trim(line);
            if (line.empty()) continue;
            const auto eq = line.find('=');
            if (eq == std::string_view::npos)
                throw Error(ErrorKind::config, "line " + std::to_string(line_no) + ": expected key = value");
            const auto key = trim(line.substr(0, eq));
            if (key.empty()) throw Error(ErrorKind::config, "line " + std::to_string(line_no) + ": empty key");
            kv.set(std::string(key), std::string(trim(line.substr(eq + 1))));
        }
        return kv;
    }

    static KeyValues load(const std::filesystem::path& path) {
        std::ifstream in(path);
        if (!in) throw Error(ErrorKind::io, "cannot open " + path.string());
        std::stringstream ss;
        ss << in.rdbuf();
        return parse(ss.str());
    }

    /// `key=value` as given on a command line.
    void set_assignment(std::string_view assignment) {
        const auto eq = assignment.find('=');
        if (eq == std::string_view::npos) throw Error(ErrorKind::config, "expected key=value, got '" + std::string(assignment) + "'");
        set(std::string(trim(assignment.substr(0, eq))), std::string(trim(assignment.substr(eq + 1))));
    }

    void set(std::string key, std::string value) { values_[std::move(key)] = std::move(value); }

    bool contains(const std::string& key) const { return values_.count(key) != 0; }

    const std::map<std::string, std::string>& entries() const { return values_; }

    void merge(const KeyValues& other) {
        for (const auto& [k, v] : other.values_) values_[k] = v;
    }

    /// Rejects keys outside `known` so typos do not silently fall back to defaults.
    void require_known(const std::set<std::string>& known) const {
        for (const auto& [k, v] : values_)
            if (!known.count(k)) throw Error(ErrorKind::config, "unknown key '" + k + "'");
    }

    std::string get_string(const std::string& key, std::string fallback) const {
        auto it = values_.find(key);
        return it == values_.end() ? fallback : it->second;
    }

    double get_double(const std::string& key, double fallback) const {
        auto it = values_.find(key);
        if (it == values_.end()) return fallback;
        return parse_number<double>(key, it->second);
    }

    template <typename Int>
    Int get_int(const std::string& key, Int fallback) const {
        auto it = values_.find(key);
        if (it == values_.end()) return fallback;
        return parse_number<Int>(key, it->second);
    }

    double require_double(const std::string& key) const {
        auto it = values_.find(key);
        if (it == values_.end()) throw Error(ErrorKind::config, "missing key '" + key + "'");
        return parse_number<double>(key, it->second);
    }

private:
    template <typename T>
    static T parse_number(const std::string& key, const std::string& text) {
        T value{};
        const char* end = text.data() + text.size();
        auto [ptr, ec] = std::from_chars(text.data(), end, value);
        if (ec != std::errc{} || ptr != end)
            throw Error(ErrorKind::config, "key '" + key + "': cannot parse '" + text + "' as a number");
        return value;
    }

    std::map<std::string, std::string> values_;
};

/// Floats in every output file use 9 significant digits.
inline std::string format_number(double v) {
    std::ostringstream os;
    os << std::setprecision(9) << v;
    return os.str();
}

} // namespace alto
