#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace aqlock::csv {

/// Minimal RFC-4180 reader: quoted fields, doubled quotes, CRLF tolerated.
struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    /// 1-based line number of each row in the source, for error messages.
    std::vector<std::size_t> line_numbers;

    std::optional<std::size_t> column(std::string_view name) const;
};

Table parse(std::istream& in);
Table read_file(const std::string& path);

std::vector<std::string> split_line(std::string_view line);

/// Shortest representation that parses back to the same double.
std::string format_double(double value);
std::optional<double> parse_double(std::string_view text);

std::string escape(std::string_view field);
void write_row(std::ostream& out, const std::vector<std::string>& fields);

}  // namespace aqlock::csv
