#pragma once

#include <istream>
#include <optional>
#include <string>
#include <vector>

namespace lawkit::csv {

// Minimal comma-separated reader for the run-log and series formats used
// here: no quoting, no embedded commas, '#' lines and blank lines skipped.
struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    // 1-based line number of each row in the source stream, for error messages.
    std::vector<std::size_t> line_numbers;

    std::optional<std::size_t> column(const std::string& name) const;
};

Table read(std::istream& in);

std::vector<std::string> split_line(const std::string& line);

// %.17g — enough digits that parse(serialize(x)) == x for doubles.
std::string format_double(double v);

}  // namespace lawkit::csv
