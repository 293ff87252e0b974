#include "nhmc/config.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace nhmc {

namespace {

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

std::string unquote(std::string v) {
    if (v.size() >= 2 && ((v.front() == '"' && v.back() == '"') || (v.front() == '\'' && v.back() == '\'')))
        return v.substr(1, v.size() - 2);
    return v;
}

[[noreturn]] void fail(const std::string& name, int line, const std::string& what) {
    throw std::invalid_argument(name + ":" + std::to_string(line) + ": " + what);
}

}  // namespace

Config Config::parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("config: cannot open " + path);
    return parse(in, path);
}

Config Config::parse(std::istream& in, const std::string& name) {
    Config c;
    c.name_ = name;
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        // strip comments outside quotes
        bool quoted = false;
        for (std::size_t i = 0; i < line.size(); ++i) {
            if (line[i] == '"') quoted = !quoted;
            if (line[i] == '#' && !quoted) {
                line = line.substr(0, i);
                break;
            }
        }
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') fail(name, lineno, "unterminated section header");
            section = trim(line.substr(1, line.size() - 2));
            if (section.empty()) fail(name, lineno, "empty section name");
            continue;
        }
        std::size_t eq = line.find('=');
        if (eq == std::string::npos) fail(name, lineno, "expected key = value");
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (key.empty()) fail(name, lineno, "empty key");
        if (value.empty()) fail(name, lineno, "empty value for key '" + key + "'");
        c.data_[section][key] = value;
    }
    return c;
}

bool Config::has(const std::string& section, const std::string& key) const {
    auto s = data_.find(section);
    return s != data_.end() && s->second.count(key) > 0;
}

std::string Config::get_str(const std::string& section, const std::string& key) const {
    auto s = data_.find(section);
    if (s == data_.end() || !s->second.count(key))
        throw std::invalid_argument(name_ + ": missing [" + section + "] " + key);
    return unquote(s->second.at(key));
}

std::string Config::get_str_or(const std::string& section, const std::string& key,
                               const std::string& fallback) const {
    return has(section, key) ? get_str(section, key) : fallback;
}

double Config::get_double(const std::string& section, const std::string& key) const {
    std::string v = get_str(section, key);
    try {
        std::size_t used = 0;
        double x = std::stod(v, &used);
        if (used != v.size()) throw std::invalid_argument("trailing");
        return x;
    } catch (...) {
        throw std::invalid_argument(name_ + ": [" + section + "] " + key + " is not a number: " + v);
    }
}

double Config::get_double_or(const std::string& section, const std::string& key,
                             double fallback) const {
    return has(section, key) ? get_double(section, key) : fallback;
}

long Config::get_long(const std::string& section, const std::string& key) const {
    double v = get_double(section, key);
    long l = static_cast<long>(v);
    if (static_cast<double>(l) != v)
        throw std::invalid_argument(name_ + ": [" + section + "] " + key + " must be an integer");
    return l;
}

long Config::get_long_or(const std::string& section, const std::string& key, long fallback) const {
    return has(section, key) ? get_long(section, key) : fallback;
}

std::uint64_t Config::get_u64_or(const std::string& section, const std::string& key,
                                 std::uint64_t fallback) const {
    if (!has(section, key)) return fallback;
    std::string v = get_str(section, key);
    try {
        return std::stoull(v);
    } catch (...) {
        throw std::invalid_argument(name_ + ": [" + section + "] " + key + " is not an unsigned integer");
    }
}

bool Config::get_bool_or(const std::string& section, const std::string& key, bool fallback) const {
    if (!has(section, key)) return fallback;
    std::string v = get_str(section, key);
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw std::invalid_argument(name_ + ": [" + section + "] " + key + " is not a boolean: " + v);
}

std::vector<std::string> Config::get_str_list(const std::string& section,
                                              const std::string& key) const {
    std::string v = get_str(section, key);
    if (!v.empty() && v.front() == '[') {
        if (v.back() != ']')
            throw std::invalid_argument(name_ + ": [" + section + "] " + key + " unterminated list");
        v = v.substr(1, v.size() - 2);
    }
    std::vector<std::string> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(unquote(item));
    }
    return out;
}

std::vector<double> Config::get_list(const std::string& section, const std::string& key) const {
    std::vector<double> out;
    for (const auto& s : get_str_list(section, key)) {
        try {
            out.push_back(std::stod(s));
        } catch (...) {
            throw std::invalid_argument(name_ + ": [" + section + "] " + key +
                                        " contains a non-number: " + s);
        }
    }
    return out;
}

void Config::set(const std::string& section, const std::string& key, const std::string& value) {
    data_[section][key] = value;
}

}  // namespace nhmc
