#include "chipdse/records.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "chipdse/types.hpp"

namespace chipdse {

std::int64_t parse_int(std::string_view text, std::string_view context) {
    std::int64_t value = 0;
    const auto* first = text.data();
    const auto* last = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{} || ptr != last) {
        throw ParseError(std::string(context) + ": expected integer, got '" + std::string(text) +
                         "'");
    }
    return value;
}

double parse_double(std::string_view text, std::string_view context) {
    // from_chars for double is not available in libstdc++ 11.
    std::string owned(text);
    std::size_t consumed = 0;
    double value = 0.0;
    try {
        value = std::stod(owned, &consumed);
    } catch (const std::exception&) {
        consumed = 0;
    }
    if (consumed != owned.size() || owned.empty() || !std::isfinite(value)) {
        throw ParseError(std::string(context) + ": expected number, got '" + owned + "'");
    }
    return value;
}

std::string Record::where() const { return "line " + std::to_string(line) + " (" + keyword + ")"; }

const std::string& Record::str(const std::string& key) const {
    auto it = values.find(key);
    if (it == values.end()) throw ParseError(where() + ": missing key '" + key + "'");
    return it->second;
}

std::int64_t Record::integer(const std::string& key) const {
    return parse_int(str(key), where() + " key '" + key + "'");
}

std::int64_t Record::integer_or(const std::string& key, std::int64_t fallback) const {
    return has(key) ? integer(key) : fallback;
}

double Record::number(const std::string& key) const {
    return parse_double(str(key), where() + " key '" + key + "'");
}

double Record::number_or(const std::string& key, double fallback) const {
    return has(key) ? number(key) : fallback;
}

void Record::require_keys_within(const std::set<std::string>& allowed) const {
    for (const auto& [key, _] : values) {
        if (!allowed.count(key)) throw ParseError(where() + ": unknown key '" + key + "'");
    }
}

std::vector<Record> parse_records(std::string_view text) {
    std::vector<Record> out;
    std::istringstream in{std::string(text)};
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        std::istringstream tokens(line);
        std::string tok;
        Record rec;
        rec.line = lineno;
        while (tokens >> tok) {
            if (rec.keyword.empty()) {
                rec.keyword = tok;
                continue;
            }
            auto eq = tok.find('=');
            if (eq == std::string::npos) {
                if (!rec.values.empty()) {
                    throw ParseError("line " + std::to_string(lineno) +
                                     ": positional token after key=value pairs");
                }
                rec.positional.push_back(tok);
                continue;
            }
            std::string key = tok.substr(0, eq);
            std::string value = tok.substr(eq + 1);
            if (key.empty() || value.empty()) {
                throw ParseError("line " + std::to_string(lineno) + ": malformed pair '" + tok + "'");
            }
            if (!rec.values.emplace(key, value).second) {
                throw ParseError("line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
            }
        }
        if (!rec.keyword.empty()) out.push_back(std::move(rec));
    }
    return out;
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace chipdse
