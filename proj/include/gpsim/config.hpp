#pragma once

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "gpsim/errors.hpp"

namespace gpsim {

// Sectioned key-value configuration:
//
//   # comment
//   [section]
//   key = value
//
// Sections and keys serialize in sorted order, so parse -> serialize ->
// parse is the identity on the stored data.
class Config {
public:
    using Section = std::map<std::string, std::string>;

    static Config parse(std::istream& in) {
        Config cfg;
        std::string line, section;
        std::size_t lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            const std::string t = trim(line);
            if (t.empty() || t[0] == '#') continue;
            if (t.front() == '[') {
                if (t.back() != ']')
                    throw ConfigError("config line " + std::to_string(lineno) +
                                      ": unterminated section header");
                section = trim(t.substr(1, t.size() - 2));
                cfg.data_[section];
                continue;
            }
            const auto eq = t.find('=');
            if (eq == std::string::npos)
                throw ConfigError("config line " + std::to_string(lineno) +
                                  ": expected key = value");
            cfg.data_[section][trim(t.substr(0, eq))] = trim(t.substr(eq + 1));
        }
        return cfg;
    }

    static Config parse_string(const std::string& text) {
        std::istringstream in(text);
        return parse(in);
    }

    static Config parse_file(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw ConfigError("cannot open config file " + path);
        return parse(in);
    }

    std::string serialize() const {
        std::ostringstream out;
        bool first = true;
        for (const auto& [name, section] : data_) {
            if (!first) out << "\n";
            first = false;
            out << "[" << name << "]\n";
            for (const auto& [key, value] : section)
                out << key << " = " << value << "\n";
        }
        return out.str();
    }

    bool has(const std::string& section, const std::string& key) const {
        const auto s = data_.find(section);
        return s != data_.end() && s->second.count(key) > 0;
    }

    std::string get(const std::string& section, const std::string& key) const {
        const auto s = data_.find(section);
        if (s == data_.end() || !s->second.count(key))
            throw ConfigError("config: missing [" + section + "] " + key);
        return s->second.at(key);
    }

    std::string get_or(const std::string& section, const std::string& key,
                       const std::string& fallback) const {
        return has(section, key) ? get(section, key) : fallback;
    }

    double get_double(const std::string& section, const std::string& key) const {
        return to_double(get(section, key), section, key);
    }

    double get_double_or(const std::string& section, const std::string& key,
                         double fallback) const {
        return has(section, key) ? get_double(section, key) : fallback;
    }

    std::uint64_t get_u64_or(const std::string& section, const std::string& key,
                             std::uint64_t fallback) const {
        if (!has(section, key)) return fallback;
        try {
            return std::stoull(get(section, key));
        } catch (const std::exception&) {
            throw ConfigError("config: [" + section + "] " + key +
                              " is not an unsigned integer");
        }
    }

    void set(const std::string& section, const std::string& key,
             const std::string& value) {
        data_[section][key] = value;
    }

    const std::map<std::string, Section>& sections() const { return data_; }

    bool operator==(const Config& other) const { return data_ == other.data_; }

    // Stable digest of the canonical serialization (FNV-1a).
    std::string digest() const {
        std::uint64_t h = 1469598103934665603ull;
        for (char c : serialize()) {
            h ^= static_cast<unsigned char>(c);
            h *= 1099511628211ull;
        }
        char buf[20];
        std::snprintf(buf, sizeof(buf), "%016llx",
                      static_cast<unsigned long long>(h));
        return buf;
    }

private:
    static std::string trim(const std::string& s) {
        std::size_t a = s.find_first_not_of(" \t\r");
        std::size_t b = s.find_last_not_of(" \t\r");
        return a == std::string::npos ? "" : s.substr(a, b - a + 1);
    }

    static double to_double(const std::string& v, const std::string& section,
                            const std::string& key) {
        try {
            std::size_t pos = 0;
            // accept simple fractions like 1/3 for exact-looking configs
            const auto slash = v.find('/');
            if (slash != std::string::npos) {
                const double num = std::stod(v.substr(0, slash));
                const double den = std::stod(v.substr(slash + 1));
                return num / den;
            }
            const double d = std::stod(v, &pos);
            return d;
        } catch (const std::exception&) {
            throw ConfigError("config: [" + section + "] " + key +
                              " is not a number: " + v);
        }
    }

    std::map<std::string, Section> data_;
};

// Comma-separated list of numbers.
inline std::vector<double> parse_number_list(const std::string& text) {
    std::vector<double> out;
    std::string cur;
    std::istringstream in(text);
    while (std::getline(in, cur, ',')) {
        if (cur.find_first_not_of(" \t") == std::string::npos) continue;
        try {
            out.push_back(std::stod(cur));
        } catch (const std::exception&) {
            throw ConfigError("expected a number list, got: " + text);
        }
    }
    return out;
}

}  // namespace gpsim
