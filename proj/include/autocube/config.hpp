#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace autocube {

// Flat `key = value` text config. '#' starts a comment, blank lines are
// skipped, keys are [A-Za-z0-9_.]+. Serialization is canonical: keys sorted,
// one per line. Used for training configs and checkpoint headers.
class KeyValueConfig {
public:
    static KeyValueConfig parse_string(const std::string& text);
    static KeyValueConfig parse_file(const std::string& path);

    bool has(const std::string& key) const { return values_.count(key) > 0; }

    std::string get_string(const std::string& key) const;
    std::string get_string(const std::string& key, const std::string& fallback) const;
    long long get_int(const std::string& key) const;
    long long get_int(const std::string& key, long long fallback) const;
    std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;
    double get_double(const std::string& key) const;
    double get_double(const std::string& key, double fallback) const;
    std::vector<int> get_int_list(const std::string& key,
                                  const std::vector<int>& fallback) const;

    void set(const std::string& key, const std::string& value);
    void set_int(const std::string& key, long long value);
    void set_double(const std::string& key, double value);
    void set_int_list(const std::string& key, const std::vector<int>& value);

    // Throws listing any key outside `known` (typo protection).
    void require_known(const std::set<std::string>& known) const;

    std::string serialize() const;

    const std::map<std::string, std::string>& values() const { return values_; }

private:
    std::map<std::string, std::string> values_;
};

}  // namespace autocube
