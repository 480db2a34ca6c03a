#include "mixopt/csv.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "mixopt/errors.hpp"

namespace mixopt {

namespace {
std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) {
        // trim surrounding whitespace
        auto b = cell.find_first_not_of(" \t\r");
        auto e = cell.find_last_not_of(" \t\r");
        cells.push_back(b == std::string::npos ? "" : cell.substr(b, e - b + 1));
    }
    if (!line.empty() && line.back() == ',') cells.push_back("");
    return cells;
}
}  // namespace

std::size_t CsvTable::column(const std::string& name) const {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw DataError("missing column '" + name + "'");
    return static_cast<std::size_t>(it - header.begin());
}

bool CsvTable::has_column(const std::string& name) const {
    return std::find(header.begin(), header.end(), name) != header.end();
}

CsvTable parse_csv(const std::string& text) {
    CsvTable table;
    std::stringstream ss(text);
    std::string line;
    std::size_t lineno = 0;
    bool have_header = false;
    while (std::getline(ss, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        auto cells = split_line(line);
        if (!have_header) {
            table.header = std::move(cells);
            have_header = true;
            continue;
        }
        if (cells.size() != table.header.size()) {
            throw DataError("line " + std::to_string(lineno) + ": expected " +
                            std::to_string(table.header.size()) + " cells, got " +
                            std::to_string(cells.size()));
        }
        table.rows.push_back(std::move(cells));
        table.line_numbers.push_back(lineno);
    }
    if (!have_header) throw DataError("empty table: no header row");
    return table;
}

CsvTable read_csv_file(const std::string& path) {
    try {
        return parse_csv(read_file_text(path));
    } catch (const DataError& e) {
        throw DataError(path + ": " + e.what());
    }
}

std::string read_file_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_file_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write '" + path + "'");
    out << text;
}

double parse_double_cell(const std::string& cell, std::size_t line, const std::string& column) {
    double v = 0.0;
    const char* b = cell.data();
    const char* e = b + cell.size();
    auto [p, ec] = std::from_chars(b, e, v);
    if (ec != std::errc{} || p != e) {
        throw DataError("line " + std::to_string(line) + ", column '" + column +
                        "': non-numeric cell '" + cell + "'");
    }
    return v;
}

long parse_long_cell(const std::string& cell, std::size_t line, const std::string& column) {
    long v = 0;
    const char* b = cell.data();
    const char* e = b + cell.size();
    auto [p, ec] = std::from_chars(b, e, v);
    if (ec != std::errc{} || p != e) {
        throw DataError("line " + std::to_string(line) + ", column '" + column +
                        "': non-integer cell '" + cell + "'");
    }
    return v;
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    // drop the exponent-free trailing noise for clean integers
    std::string s(buf);
    if (s.find('.') == std::string::npos && s.find('e') == std::string::npos &&
        s.find("inf") == std::string::npos && s.find("nan") == std::string::npos)
        return s;
    // try shorter representations that still round-trip
    for (int prec = 1; prec < 17; ++prec) {
        std::snprintf(buf, sizeof(buf), "%.*g", prec, v);
        double back = 0.0;
        std::sscanf(buf, "%lf", &back);
        if (back == v) return std::string(buf);
    }
    return s;
}

}  // namespace mixopt
