#include "spikelab/config.hpp"

#include "spikelab/errors.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace spikelab {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

double to_double(const std::string& text, const std::string& what) {
    const std::string t = trim(text);
    double v = 0.0;
    const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
    if (t.empty() || res.ec != std::errc() || res.ptr != t.data() + t.size())
        throw ConfigError(what + ": cannot parse '" + text + "' as a real number");
    return v;
}

}  // namespace

std::vector<double> parse_real_list(const std::string& text, const std::string& what) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(to_double(item, what));
    if (out.empty()) throw ConfigError(what + ": empty list");
    return out;
}

KeyValues KeyValues::parse(const std::string& text, const std::string& origin) {
    KeyValues kv;
    kv.origin_ = origin;
    std::stringstream ss(text);
    std::string line;
    int lineno = 0;
    while (std::getline(ss, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(origin + ":" + std::to_string(lineno) + ": expected key=value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) throw ConfigError(origin + ":" + std::to_string(lineno) + ": empty key");
        if (kv.entries_.count(key)) throw ConfigError(origin + ": duplicate key '" + key + "'");
        kv.entries_[key] = value;
    }
    return kv;
}

KeyValues KeyValues::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open file '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return parse(buf.str(), path);
}

bool KeyValues::has(const std::string& key) const { return entries_.count(key) > 0; }

const std::string& KeyValues::raw(const std::string& key) const {
    auto it = entries_.find(key);
    if (it == entries_.end()) throw ConfigError(origin_ + ": missing required key '" + key + "'");
    used_.insert(key);
    return it->second;
}

std::string KeyValues::get_string(const std::string& key) const { return raw(key); }
std::string KeyValues::get_string(const std::string& key, const std::string& fallback) const {
    return has(key) ? raw(key) : fallback;
}

double KeyValues::get_double(const std::string& key) const { return to_double(raw(key), origin_ + ": key '" + key + "'"); }
double KeyValues::get_double(const std::string& key, double fallback) const {
    return has(key) ? get_double(key) : fallback;
}

long long KeyValues::get_int(const std::string& key) const {
    const std::string t = trim(raw(key));
    long long v = 0;
    const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
    if (t.empty() || res.ec != std::errc() || res.ptr != t.data() + t.size())
        throw ConfigError(origin_ + ": key '" + key + "': cannot parse '" + t + "' as an integer");
    return v;
}
long long KeyValues::get_int(const std::string& key, long long fallback) const {
    return has(key) ? get_int(key) : fallback;
}

std::vector<double> KeyValues::get_list(const std::string& key) const {
    return parse_real_list(raw(key), origin_ + ": key '" + key + "'");
}
std::vector<double> KeyValues::get_list(const std::string& key, const std::vector<double>& fallback) const {
    return has(key) ? get_list(key) : fallback;
}

Point KeyValues::get_point(const std::string& key) const {
    const auto v = get_list(key);
    if (v.size() != 4) throw ConfigError(origin_ + ": key '" + key + "' needs exactly 4 reals");
    return Point(v[0], v[1], v[2], v[3]);
}
Point KeyValues::get_point(const std::string& key, const Point& fallback) const {
    return has(key) ? get_point(key) : fallback;
}

void KeyValues::reject_unknown() const {
    for (const auto& [k, v] : entries_)
        if (!used_.count(k)) throw ConfigError(origin_ + ": unknown key '" + k + "'");
}

}  // namespace spikelab
