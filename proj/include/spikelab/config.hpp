#pragma once

#include "spikelab/geometry.hpp"

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace spikelab {

/// Plain-text key=value document. '#' starts a comment; blank lines are ignored.
/// Every read marks the key as consumed so that leftovers can be rejected by name.
class KeyValues {
public:
    static KeyValues parse(const std::string& text, const std::string& origin = "<string>");
    static KeyValues load(const std::string& path);

    bool has(const std::string& key) const;
    std::string get_string(const std::string& key) const;
    std::string get_string(const std::string& key, const std::string& fallback) const;
    double get_double(const std::string& key) const;
    double get_double(const std::string& key, double fallback) const;
    long long get_int(const std::string& key) const;
    long long get_int(const std::string& key, long long fallback) const;
    std::vector<double> get_list(const std::string& key) const;
    std::vector<double> get_list(const std::string& key, const std::vector<double>& fallback) const;
    Point get_point(const std::string& key) const;
    Point get_point(const std::string& key, const Point& fallback) const;

    /// Throws ConfigError naming the first key never read.
    void reject_unknown() const;

    const std::map<std::string, std::string>& entries() const { return entries_; }
    const std::string& origin() const { return origin_; }

private:
    std::map<std::string, std::string> entries_;
    std::string origin_;
    mutable std::set<std::string> used_;

    const std::string& raw(const std::string& key) const;
};

/// Comma separated reals ("1e-1,1e-2").
std::vector<double> parse_real_list(const std::string& text, const std::string& what);

}  // namespace spikelab
