#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace chipdse {

/// One line of the line-oriented text format shared by workload, config and
/// manifest files: `keyword positional... key=value...`. `#` starts a comment.
struct Record {
    std::string keyword;
    std::vector<std::string> positional;
    std::map<std::string, std::string> values;
    int line = 0;

    bool has(const std::string& key) const { return values.count(key) != 0; }
    const std::string& str(const std::string& key) const;
    std::int64_t integer(const std::string& key) const;
    std::int64_t integer_or(const std::string& key, std::int64_t fallback) const;
    double number(const std::string& key) const;
    double number_or(const std::string& key, double fallback) const;

    /// Throws ParseError if any key outside `allowed` is present.
    void require_keys_within(const std::set<std::string>& allowed) const;

    std::string where() const;
};

std::vector<Record> parse_records(std::string_view text);
std::string read_text_file(const std::string& path);

std::int64_t parse_int(std::string_view text, std::string_view context);
double parse_double(std::string_view text, std::string_view context);

}  // namespace chipdse
