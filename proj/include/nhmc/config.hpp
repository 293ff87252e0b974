#pragma once

#include <cstdint>
#include <istream>
#include <map>
#include <string>
#include <vector>

namespace nhmc {

// Line-oriented `key = value` configuration with [section] headers, a
// TOML-compatible subset. Parse errors carry file and line.
class Config {
public:
    static Config parse_file(const std::string& path);
    static Config parse(std::istream& in, const std::string& name);

    bool has(const std::string& section, const std::string& key) const;
    std::string get_str(const std::string& section, const std::string& key) const;
    std::string get_str_or(const std::string& section, const std::string& key,
                           const std::string& fallback) const;
    double get_double(const std::string& section, const std::string& key) const;
    double get_double_or(const std::string& section, const std::string& key, double fallback) const;
    long get_long(const std::string& section, const std::string& key) const;
    long get_long_or(const std::string& section, const std::string& key, long fallback) const;
    std::uint64_t get_u64_or(const std::string& section, const std::string& key,
                             std::uint64_t fallback) const;
    bool get_bool_or(const std::string& section, const std::string& key, bool fallback) const;
    std::vector<double> get_list(const std::string& section, const std::string& key) const;
    std::vector<std::string> get_str_list(const std::string& section, const std::string& key) const;

    void set(const std::string& section, const std::string& key, const std::string& value);

private:
    std::map<std::string, std::map<std::string, std::string>> data_;
    std::string name_ = "<config>";
};

}  // namespace nhmc
