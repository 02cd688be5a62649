#pragma once

#include <map>
#include <string>
#include <vector>

namespace adhesim {

// Sectioned key = value text.  '#' starts a comment, [name] opens a section,
// keys before any section land in section "".
class KeyValueFile {
public:
    struct Entry {
        std::string value;
        int line = 0;
    };

    static KeyValueFile parse(const std::string& text, const std::string& origin = "<string>");
    static KeyValueFile load(const std::string& path);

    bool has_section(const std::string& section) const { return data_.count(section) > 0; }
    bool has(const std::string& section, const std::string& key) const;
    const Entry* find(const std::string& section, const std::string& key) const;

    std::string get_string(const std::string& section, const std::string& key) const;
    std::string get_string(const std::string& section, const std::string& key, const std::string& fallback) const;
    double get_double(const std::string& section, const std::string& key) const;
    double get_double(const std::string& section, const std::string& key, double fallback) const;
    int get_int(const std::string& section, const std::string& key, int fallback) const;
    bool get_bool(const std::string& section, const std::string& key, bool fallback) const;
    std::vector<double> get_list(const std::string& section, const std::string& key) const;

    std::vector<std::string> keys(const std::string& section) const;
    std::vector<std::string> sections() const;
    const std::string& origin() const { return origin_; }
    [[noreturn]] void fail(const std::string& section, const std::string& key, const std::string& why) const;

private:
    std::string origin_;
    std::map<std::string, std::map<std::string, Entry>> data_;
};

}  // namespace adhesim
