#include "autocube/config.hpp"

#include <cctype>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace autocube {

namespace {

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) return {};
    const auto end = s.find_last_not_of(" \t\r\n");
    return s.substr(begin, end - begin + 1);
}

bool valid_key(const std::string& key) {
    if (key.empty()) return false;
    for (char c : key)
        if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_' && c != '.')
            return false;
    return true;
}

}  // namespace

KeyValueConfig KeyValueConfig::parse_string(const std::string& text) {
    KeyValueConfig cfg;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos)
            line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error("config line " + std::to_string(line_no) +
                                     ": expected 'key = value'");
        const std::string key = trim(line.substr(0, eq));
        if (!valid_key(key))
            throw std::runtime_error("config line " + std::to_string(line_no) +
                                     ": bad key '" + key + "'");
        cfg.values_[key] = trim(line.substr(eq + 1));
    }
    return cfg;
}

KeyValueConfig KeyValueConfig::parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_string(buf.str());
}

std::string KeyValueConfig::get_string(const std::string& key) const {
    const auto it = values_.find(key);
    if (it == values_.end())
        throw std::runtime_error("config: missing required key '" + key + "'");
    return it->second;
}

std::string KeyValueConfig::get_string(const std::string& key,
                                       const std::string& fallback) const {
    const auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second;
}

long long KeyValueConfig::get_int(const std::string& key) const {
    const std::string v = get_string(key);
    try {
        std::size_t pos = 0;
        const long long out = std::stoll(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return out;
    } catch (const std::exception&) {
        throw std::runtime_error("config: key '" + key + "' is not an integer: " + v);
    }
}

long long KeyValueConfig::get_int(const std::string& key, long long fallback) const {
    return has(key) ? get_int(key) : fallback;
}

std::uint64_t KeyValueConfig::get_u64(const std::string& key,
                                      std::uint64_t fallback) const {
    if (!has(key)) return fallback;
    const std::string v = get_string(key);
    try {
        std::size_t pos = 0;
        const std::uint64_t out = std::stoull(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return out;
    } catch (const std::exception&) {
        throw std::runtime_error("config: key '" + key + "' is not an unsigned integer: " + v);
    }
}

double KeyValueConfig::get_double(const std::string& key) const {
    const std::string v = get_string(key);
    try {
        std::size_t pos = 0;
        const double out = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return out;
    } catch (const std::exception&) {
        throw std::runtime_error("config: key '" + key + "' is not a number: " + v);
    }
}

double KeyValueConfig::get_double(const std::string& key, double fallback) const {
    return has(key) ? get_double(key) : fallback;
}

std::vector<int> KeyValueConfig::get_int_list(const std::string& key,
                                              const std::vector<int>& fallback) const {
    if (!has(key)) return fallback;
    std::vector<int> out;
    std::istringstream in(get_string(key));
    std::string token;
    while (in >> token) {
        try {
            out.push_back(std::stoi(token));
        } catch (const std::exception&) {
            throw std::runtime_error("config: key '" + key +
                                     "' has a non-integer entry: " + token);
        }
    }
    return out;
}

void KeyValueConfig::set(const std::string& key, const std::string& value) {
    if (!valid_key(key)) throw std::runtime_error("config: bad key '" + key + "'");
    values_[key] = value;
}

void KeyValueConfig::set_int(const std::string& key, long long value) {
    set(key, std::to_string(value));
}

void KeyValueConfig::set_double(const std::string& key, double value) {
    std::ostringstream out;
    out.precision(17);
    out << value;
    set(key, out.str());
}

void KeyValueConfig::set_int_list(const std::string& key, const std::vector<int>& value) {
    std::string joined;
    for (std::size_t i = 0; i < value.size(); ++i) {
        if (i > 0) joined += ' ';
        joined += std::to_string(value[i]);
    }
    set(key, joined);
}

void KeyValueConfig::require_known(const std::set<std::string>& known) const {
    std::string unknown;
    for (const auto& [key, value] : values_)
        if (known.find(key) == known.end()) unknown += (unknown.empty() ? "" : ", ") + key;
    if (!unknown.empty())
        throw std::runtime_error("config: unknown keys: " + unknown);
}

std::string KeyValueConfig::serialize() const {
    std::string out;
    for (const auto& [key, value] : values_) out += key + " = " + value + "\n";
    return out;
}

}  // namespace autocube
