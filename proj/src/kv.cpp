#include "reachavoid/kv.hpp"

#include <cerrno>
#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "reachavoid/error.hpp"

namespace reachavoid {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

double parse_double(const std::string& text, const std::string& what) {
    // from_chars is locale-independent, matching format_double.
    double v = 0.0;
    const char* first = text.c_str();
    const char* last = first + text.size();
    const auto r = std::from_chars(first, last, v);
    if (r.ec != std::errc{} || r.ptr != last || first == last) {
        throw ConfigError("invalid number for " + what + ": '" + text + "'");
    }
    return v;
}

}  // namespace

KvFile KvFile::parse_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot open config file: " + path);
    std::stringstream ss;
    ss << is.rdbuf();
    return parse_text(ss.str(), path);
}

KvFile KvFile::parse_text(const std::string& text, const std::string& origin) {
    KvFile kv;
    kv.origin_ = origin;
    std::istringstream is(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        const std::size_t eq = t.find('=');
        if (eq == std::string::npos) {
            throw ConfigError(origin + ":" + std::to_string(lineno) +
                              ": expected 'key = value'");
        }
        const std::string key = trim(t.substr(0, eq));
        const std::string value = trim(t.substr(eq + 1));
        if (key.empty()) {
            throw ConfigError(origin + ":" + std::to_string(lineno) +
                              ": empty key");
        }
        kv.set(key, value);
    }
    return kv;
}

bool KvFile::has(const std::string& key) const { return values_.count(key) > 0; }

const std::string& KvFile::raw(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) {
        throw ConfigError("missing config key: " + key +
                          (origin_.empty() ? "" : " (in " + origin_ + ")"));
    }
    return it->second;
}

double KvFile::get_double(const std::string& key) const {
    return parse_double(raw(key), key);
}

std::size_t KvFile::get_count(const std::string& key) const {
    const double v = get_double(key);
    if (v < 0 || v != static_cast<double>(static_cast<std::size_t>(v))) {
        throw ConfigError("expected a non-negative integer for " + key);
    }
    return static_cast<std::size_t>(v);
}

std::vector<double> KvFile::get_doubles(const std::string& key) const {
    std::istringstream is(raw(key));
    std::vector<double> out;
    std::string tok;
    while (is >> tok) out.push_back(parse_double(tok, key));
    if (out.empty()) throw ConfigError("expected numbers for " + key);
    return out;
}

std::vector<std::size_t> KvFile::get_counts(const std::string& key) const {
    std::vector<std::size_t> out;
    for (double v : get_doubles(key)) {
        if (v < 0 || v != static_cast<double>(static_cast<std::size_t>(v))) {
            throw ConfigError("expected non-negative integers for " + key);
        }
        out.push_back(static_cast<std::size_t>(v));
    }
    return out;
}

void KvFile::set(const std::string& key, const std::string& value) {
    if (values_.find(key) == values_.end()) order_.push_back(key);
    values_[key] = value;
}

std::string KvFile::to_text() const {
    std::string out;
    for (const auto& k : order_) {
        out += k;
        out += " = ";
        out += values_.at(k);
        out += "\n";
    }
    return out;
}

void KvFile::save(const std::string& path) const {
    std::ofstream os(path, std::ios::trunc);
    if (!os) throw IoError("cannot write config file: " + path);
    os << to_text();
    if (!os) throw IoError("write failed: " + path);
}

std::string format_double(double v) {
    // Shortest decimal form that parses back to the same double; always a
    // dot decimal separator regardless of locale.
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, r.ptr);
}

std::string format_fixed(double v, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
    return buf;
}

}  // namespace reachavoid
