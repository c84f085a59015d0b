#include "hrt/series_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <optional>
#include <sstream>

#include "hrt/error.hpp"

namespace hrt {

namespace {

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) return "";
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::optional<double> parse_number(const std::string& field) {
    const std::string s = trim(field);
    if (s.empty()) return std::nullopt;
    const char* begin = s.data();
    if (*begin == '+') ++begin;
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(begin, s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
    return v;
}

bool all_digits(const std::string& s) {
    return !s.empty() && std::all_of(s.begin(), s.end(), [](unsigned char c) { return c >= '0' && c <= '9'; });
}

}  // namespace

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                cur += '"';
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                cur += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    fields.push_back(cur);
    return fields;
}

TimeSeries read_series_csv(std::istream& in, const std::string& column, const std::string& source) {
    std::string line;
    std::size_t line_no = 0;
    std::optional<std::size_t> index;
    bool first_row = true;
    std::vector<double> values;
    const std::string want = trim(column);
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const auto fields = split_csv_line(line);
        if (first_row) {
            first_row = false;
            std::size_t pick = 0;
            bool by_name = false;
            if (!want.empty()) {
                const auto it = std::find_if(fields.begin(), fields.end(),
                                             [&](const std::string& f) { return trim(f) == want; });
                if (it != fields.end()) {
                    pick = static_cast<std::size_t>(it - fields.begin());
                    by_name = true;
                } else if (all_digits(want) && std::stoul(want) >= 1) {
                    pick = std::stoul(want) - 1;
                } else {
                    throw IoError(source + ": column '" + want + "' not found in header");
                }
            }
            if (pick >= fields.size()) {
                throw IoError(source + ": column '" + want + "' not present (row has " +
                              std::to_string(fields.size()) + " fields)");
            }
            index = pick;
            if (by_name || !parse_number(fields[pick])) continue;  // header row
        }
        if (*index >= fields.size()) {
            throw IoError(source + ":" + std::to_string(line_no) + ": missing column " +
                          std::to_string(*index + 1));
        }
        const auto v = parse_number(fields[*index]);
        if (!v) {
            throw IoError(source + ":" + std::to_string(line_no) + ": cannot parse '" + trim(fields[*index]) +
                          "' as a number");
        }
        values.push_back(*v);
    }
    if (values.empty()) throw IoError(source + ": no numeric values found");
    return TimeSeries(std::move(values));
}

TimeSeries read_series_csv(const std::string& path, const std::string& column) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path + "'");
    return read_series_csv(in, column, path);
}

}  // namespace hrt
