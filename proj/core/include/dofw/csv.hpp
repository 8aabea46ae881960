#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace dofw::csv {

/// Shortest decimal form that round-trips to the same double.
std::string format(double value);

/// Writes one row, comma separated, newline terminated.
void write_row(std::ostream& out, const std::vector<std::string>& fields);

std::vector<std::string> split_line(std::string_view line);

double parse_double(std::string_view field);
long long parse_int(std::string_view field);

}  // namespace dofw::csv
