#pragma once

// Plain key=value configuration. `[section]` lines prefix the keys that
// follow with "section.", '#' and ';' start comments.

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace locsketch {

/// Malformed file, missing key or unparsable value.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Environment variable naming the config file used when none is given.
inline constexpr const char* kConfigEnvVar = "LOCSKETCH_CONFIG";

class Config {
public:
    Config() = default;

    /// Throws ConfigError with `source:line` on a malformed line or a repeated key.
    static Config parse(std::istream& in, const std::string& source = "<config>");
    static Config load(const std::string& path);

    bool has(const std::string& key) const { return values_.count(key) != 0; }
    /// Later calls win; used for command-line overrides.
    void set(const std::string& key, const std::string& value) { values_[key] = value; }
    const std::map<std::string, std::string>& values() const { return values_; }

    /// Keys under "section." with the prefix stripped.
    std::map<std::string, std::string> section(const std::string& name) const;

    /// Throw ConfigError when the key is missing or does not parse.
    std::string get_string(const std::string& key) const;
    double get_double(const std::string& key) const;
    std::uint64_t get_uint(const std::string& key) const;
    bool get_bool(const std::string& key) const;
    /// Comma-separated list.
    std::vector<double> get_doubles(const std::string& key) const;
    std::vector<std::uint64_t> get_uints(const std::string& key) const;

    std::string get_string(const std::string& key, const std::string& fallback) const;
    double get_double(const std::string& key, double fallback) const;
    std::uint64_t get_uint(const std::string& key, std::uint64_t fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;
    std::vector<double> get_doubles(const std::string& key, std::vector<double> fallback) const;

private:
    std::map<std::string, std::string> values_;
};

/// Value parsers shared with the command line; throw ConfigError naming `what`.
double parse_double(const std::string& text, const std::string& what);
std::uint64_t parse_uint(const std::string& text, const std::string& what);
bool parse_bool(const std::string& text, const std::string& what);

}  // namespace locsketch
