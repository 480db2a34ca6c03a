#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace mixopt {

// Minimal comma-delimited table: header row, '#' comment lines, no quoting.
// Row numbers are 1-based over the physical file so error messages line up
// with the editor.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    std::vector<std::size_t> line_numbers;  // physical line of each row

    // index of a column, DataError if absent
    std::size_t column(const std::string& name) const;
    bool has_column(const std::string& name) const;
};

CsvTable parse_csv(const std::string& text);
CsvTable read_csv_file(const std::string& path);

std::string read_file_text(const std::string& path);
void write_file_text(const std::string& path, const std::string& text);

// numeric cell parse with row/column context in the error message
double parse_double_cell(const std::string& cell, std::size_t line, const std::string& column);
long parse_long_cell(const std::string& cell, std::size_t line, const std::string& column);

std::string format_double(double v);  // round-trip safe

}  // namespace mixopt
