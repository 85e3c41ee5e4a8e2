// Copyright (c) 2026 The TIPS developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#pragma once

#include <cstddef>
#include <cstdint>
#include <istream>
#include <stdexcept>
#include <string>
#include <vector>

namespace tips {

/// Error in a key = value file. what() is "source:line: message".
class ConfigError : public std::runtime_error {
public:
    ConfigError(const std::string& source, std::size_t line, const std::string& message);
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

struct ConfigEntry {
    std::string section; // empty before the first [section]
    std::string key;
    std::string value;
    std::size_t line = 0;
};

/// Flat "key = value" text with optional [section] headers. '#' and ';'
/// start comments. Keys are case-sensitive; duplicate keys in one section are
/// an error.
struct ConfigFile {
    std::string source;
    std::vector<ConfigEntry> entries;

    static ConfigFile parse(std::istream& in, const std::string& source);
    static ConfigFile load(const std::string& path);

    [[noreturn]] void fail(const ConfigEntry& entry, const std::string& message) const;
};

double parse_double(const ConfigFile& file, const ConfigEntry& entry);
std::uint64_t parse_uint(const ConfigFile& file, const ConfigEntry& entry);
bool parse_bool(const ConfigFile& file, const ConfigEntry& entry);
/// Comma-separated list of values, whitespace trimmed.
std::vector<std::string> split_list(const std::string& value);

} // namespace tips
