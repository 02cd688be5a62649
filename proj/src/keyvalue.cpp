#include "adhesim/keyvalue.hpp"

#include "adhesim/types.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

namespace adhesim {

namespace {

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

}  // namespace

KeyValueFile KeyValueFile::parse(const std::string& text, const std::string& origin) {
    KeyValueFile f;
    f.origin_ = origin;
    std::istringstream in(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError(origin + ":" + std::to_string(lineno) + ": unterminated section header");
            section = trim(line.substr(1, line.size() - 2));
            f.data_[section];
            continue;
        }
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(origin + ":" + std::to_string(lineno) + ": expected 'key = value'");
        std::string key = trim(line.substr(0, eq));
        if (key.empty()) throw ConfigError(origin + ":" + std::to_string(lineno) + ": empty key");
        auto& sec = f.data_[section];
        if (sec.count(key))
            throw ConfigError(origin + ":" + std::to_string(lineno) + ": duplicate key '" + key + "'");
        sec[key] = Entry{trim(line.substr(eq + 1)), lineno};
    }
    return f;
}

KeyValueFile KeyValueFile::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse(ss.str(), path);
}

const KeyValueFile::Entry* KeyValueFile::find(const std::string& section, const std::string& key) const {
    auto s = data_.find(section);
    if (s == data_.end()) return nullptr;
    auto k = s->second.find(key);
    return k == s->second.end() ? nullptr : &k->second;
}

bool KeyValueFile::has(const std::string& section, const std::string& key) const {
    return find(section, key) != nullptr;
}

void KeyValueFile::fail(const std::string& section, const std::string& key, const std::string& why) const {
    const Entry* e = find(section, key);
    std::string where = origin_;
    if (e) where += ":" + std::to_string(e->line);
    throw ConfigError(where + ": [" + section + "] " + key + ": " + why);
}

std::string KeyValueFile::get_string(const std::string& section, const std::string& key) const {
    const Entry* e = find(section, key);
    if (!e) throw ConfigError(origin_ + ": missing key [" + section + "] " + key);
    return e->value;
}

std::string KeyValueFile::get_string(const std::string& section, const std::string& key,
                                     const std::string& fallback) const {
    const Entry* e = find(section, key);
    return e ? e->value : fallback;
}

double KeyValueFile::get_double(const std::string& section, const std::string& key) const {
    std::string v = get_string(section, key);
    try {
        std::size_t used = 0;
        double x = std::stod(v, &used);
        if (trim(v.substr(used)).empty()) return x;
    } catch (const std::exception&) {
    }
    fail(section, key, "not a number: '" + v + "'");
}

double KeyValueFile::get_double(const std::string& section, const std::string& key, double fallback) const {
    return has(section, key) ? get_double(section, key) : fallback;
}

int KeyValueFile::get_int(const std::string& section, const std::string& key, int fallback) const {
    if (!has(section, key)) return fallback;
    double x = get_double(section, key);
    if (x != static_cast<int>(x)) fail(section, key, "expected an integer");
    return static_cast<int>(x);
}

bool KeyValueFile::get_bool(const std::string& section, const std::string& key, bool fallback) const {
    if (!has(section, key)) return fallback;
    std::string v = get_string(section, key);
    std::transform(v.begin(), v.end(), v.begin(), [](unsigned char c) { return std::tolower(c); });
    if (v == "true" || v == "yes" || v == "on" || v == "1") return true;
    if (v == "false" || v == "no" || v == "off" || v == "0") return false;
    fail(section, key, "expected a boolean");
}

std::vector<double> KeyValueFile::get_list(const std::string& section, const std::string& key) const {
    std::string v = get_string(section, key);
    std::replace(v.begin(), v.end(), ',', ' ');
    std::istringstream in(v);
    std::vector<double> out;
    std::string tok;
    while (in >> tok) {
        try {
            std::size_t used = 0;
            out.push_back(std::stod(tok, &used));
            if (used != tok.size()) throw std::invalid_argument(tok);
        } catch (const std::exception&) {
            fail(section, key, "bad list entry '" + tok + "'");
        }
    }
    return out;
}

std::vector<std::string> KeyValueFile::keys(const std::string& section) const {
    std::vector<std::string> out;
    auto s = data_.find(section);
    if (s != data_.end())
        for (const auto& [k, e] : s->second) out.push_back(k);
    return out;
}

std::vector<std::string> KeyValueFile::sections() const {
    std::vector<std::string> out;
    for (const auto& [name, entries] : data_) out.push_back(name);
    return out;
}

}  // namespace adhesim
