#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

namespace powerplan::report {

using Cell = std::variant<std::int64_t, double, std::string>;

using Metadata = std::vector<std::pair<std::string, std::string>>;

// A CSV table: header row, data rows, and trailing "# key=value" metadata lines.
struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;
    Metadata metadata;

    void add_row(std::vector<Cell> row);
    void set(const std::string& key, const std::string& value);
    void set(const std::string& key, double value);
    // Empty string when the key is absent.
    std::string get(const std::string& key) const;
    std::size_t column(const std::string& name) const;
    double number(std::size_t row, const std::string& name) const;
};

// 10 significant digits.
std::string format_number(double v);
std::string format_cell(const Cell& cell);

std::string to_csv(const Table& table);
// Inverse of to_csv. Integers stay integers, other numerals become doubles,
// anything else is kept as text.
Table parse_csv(std::string_view text);

void write_file(const std::string& path, const std::string& contents);

}  // namespace powerplan::report
