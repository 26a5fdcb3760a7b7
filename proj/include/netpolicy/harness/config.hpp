#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace netpolicy::harness {

// Raised for malformed or unknown configuration; `path` names the field.
struct ConfigError : std::runtime_error {
    ConfigError(const std::string& path, const std::string& message);
    std::string path;
};

struct ConfigValue;
using ConfigArray = std::vector<ConfigValue>;

struct ConfigValue {
    std::variant<bool, double, std::string, ConfigArray> data;
    int line = 0;
};

// Subset of TOML: [table] headers, key = value, strings, numbers, booleans,
// (nested) arrays, # comments. Keys are addressed as "table.key".
class ConfigDocument {
public:
    static ConfigDocument parse(const std::string& text);
    static ConfigDocument load(const std::string& path);

    bool has(const std::string& key) const;
    // Accessors mark keys as used; unused keys are reported by check_all_used.
    double number(const std::string& key) const;
    double number_or(const std::string& key, double fallback) const;
    std::int64_t integer(const std::string& key) const;
    std::int64_t integer_or(const std::string& key, std::int64_t fallback) const;
    bool boolean_or(const std::string& key, bool fallback) const;
    std::string string(const std::string& key) const;
    std::string string_or(const std::string& key, const std::string& fallback) const;
    std::vector<double> numbers(const std::string& key) const;
    std::vector<double> numbers_or(const std::string& key, std::vector<double> fallback) const;
    const ConfigValue& raw(const std::string& key) const;
    bool is_string(const std::string& key) const;

    void check_all_used() const;

private:
    std::map<std::string, ConfigValue> values_;
    mutable std::set<std::string> used_;
};

}  // namespace netpolicy::harness
