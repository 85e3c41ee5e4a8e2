// Copyright (c) 2026 The TIPS developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#include "tips/config.h"

#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <utility>

namespace tips {

namespace {

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos) return {};
    const auto end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
}

} // namespace

ConfigError::ConfigError(const std::string& source, std::size_t line, const std::string& message)
    : std::runtime_error(source + ":" + std::to_string(line) + ": " + message), line_(line) {}

ConfigFile ConfigFile::parse(std::istream& in, const std::string& source) {
    ConfigFile file;
    file.source = source;
    std::set<std::pair<std::string, std::string>> seen;
    std::string section;
    std::string raw;
    std::size_t line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        const auto comment = raw.find_first_of("#;");
        const std::string line = trim(comment == std::string::npos ? raw : raw.substr(0, comment));
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') throw ConfigError(source, line_no, "unterminated section header");
            section = trim(line.substr(1, line.size() - 2));
            if (section.empty()) throw ConfigError(source, line_no, "empty section name");
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError(source, line_no, "expected 'key = value'");
        ConfigEntry entry{section, trim(line.substr(0, eq)), trim(line.substr(eq + 1)), line_no};
        if (entry.key.empty()) throw ConfigError(source, line_no, "missing key before '='");
        if (entry.value.empty()) throw ConfigError(source, line_no, "missing value for '" + entry.key + "'");
        if (!seen.emplace(section, entry.key).second)
            throw ConfigError(source, line_no, "duplicate key '" + entry.key + "'");
        file.entries.push_back(std::move(entry));
    }
    return file;
}

ConfigFile ConfigFile::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(path, 0, "cannot open file");
    return parse(in, path);
}

void ConfigFile::fail(const ConfigEntry& entry, const std::string& message) const {
    throw ConfigError(source, entry.line, message);
}

double parse_double(const ConfigFile& file, const ConfigEntry& entry) {
    double v = 0.0;
    const char* first = entry.value.data();
    const char* last = first + entry.value.size();
    const auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last || !std::isfinite(v))
        file.fail(entry, "'" + entry.key + "' expects a number, got '" + entry.value + "'");
    return v;
}

std::uint64_t parse_uint(const ConfigFile& file, const ConfigEntry& entry) {
    std::uint64_t v = 0;
    const char* first = entry.value.data();
    const char* last = first + entry.value.size();
    const auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last)
        file.fail(entry, "'" + entry.key + "' expects a non-negative integer, got '" + entry.value + "'");
    return v;
}

bool parse_bool(const ConfigFile& file, const ConfigEntry& entry) {
    if (entry.value == "true" || entry.value == "1" || entry.value == "yes") return true;
    if (entry.value == "false" || entry.value == "0" || entry.value == "no") return false;
    file.fail(entry, "'" + entry.key + "' expects true or false, got '" + entry.value + "'");
}

std::vector<std::string> split_list(const std::string& value) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (start <= value.size()) {
        const auto comma = value.find(',', start);
        const auto piece = trim(value.substr(start, comma == std::string::npos ? std::string::npos : comma - start));
        if (!piece.empty()) out.push_back(piece);
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return out;
}

} // namespace tips
