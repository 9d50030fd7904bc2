#pragma once

#include <map>
#include <string>
#include <vector>

namespace reachavoid {

// Minimal human-readable `key = value` config format shared by the env and
// learner config files. Lines starting with '#' and blank lines are ignored.
// Values keep their raw text; typed accessors parse on demand.
class KvFile {
public:
    static KvFile parse_file(const std::string& path);
    static KvFile parse_text(const std::string& text, const std::string& origin);

    bool has(const std::string& key) const;
    const std::string& raw(const std::string& key) const;

    double get_double(const std::string& key) const;
    std::size_t get_count(const std::string& key) const;
    std::vector<double> get_doubles(const std::string& key) const;  // whitespace-separated
    std::vector<std::size_t> get_counts(const std::string& key) const;

    void set(const std::string& key, const std::string& value);

    // Keys in first-insertion order, as written to file.
    const std::vector<std::string>& keys() const { return order_; }

    std::string to_text() const;
    void save(const std::string& path) const;

private:
    std::map<std::string, std::string> values_;
    std::vector<std::string> order_;
    std::string origin_;
};

// Locale-independent numeric formatting used for every file the library
// writes (configs, CSV, JSON payload values).
std::string format_double(double v);             // shortest round-trippable
std::string format_fixed(double v, int digits);  // fixed decimals, dot separator

}  // namespace reachavoid
