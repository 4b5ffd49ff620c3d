#include "powerplan/report.hpp"

#include <cerrno>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>

#include "powerplan/error.hpp"

namespace powerplan::report {

namespace {

std::vector<std::string_view> split(std::string_view line, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (;;) {
        const auto pos = line.find(sep, start);
        out.push_back(line.substr(start, pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

Cell parse_cell(std::string_view text) {
    std::int64_t i = 0;
    auto [iend, iec] = std::from_chars(text.data(), text.data() + text.size(), i);
    if (iec == std::errc() && iend == text.data() + text.size() && !text.empty()) return i;
    double d = 0.0;
    auto [dend, dec] = std::from_chars(text.data(), text.data() + text.size(), d);
    if (dec == std::errc() && dend == text.data() + text.size() && !text.empty()) return d;
    if (text == "inf") return HUGE_VAL;
    if (text == "-inf") return -HUGE_VAL;
    if (text == "nan") return std::nan("");
    return std::string(text);
}

}  // namespace

void Table::add_row(std::vector<Cell> row) {
    if (row.size() != columns.size()) {
        throw_precondition("report::Table::add_row", "row has " + std::to_string(row.size()) + " cells, expected " +
                                                         std::to_string(columns.size()));
    }
    rows.push_back(std::move(row));
}

void Table::set(const std::string& key, const std::string& value) {
    for (auto& [k, v] : metadata) {
        if (k == key) {
            v = value;
            return;
        }
    }
    metadata.emplace_back(key, value);
}

void Table::set(const std::string& key, double value) { set(key, format_number(value)); }

std::string Table::get(const std::string& key) const {
    for (const auto& [k, v] : metadata) {
        if (k == key) return v;
    }
    return {};
}

std::size_t Table::column(const std::string& name) const {
    for (std::size_t i = 0; i < columns.size(); ++i) {
        if (columns[i] == name) return i;
    }
    throw_precondition("report::Table::column", "no column named " + name);
}

double Table::number(std::size_t row, const std::string& name) const {
    const auto& cell = rows.at(row).at(column(name));
    if (const auto* d = std::get_if<double>(&cell)) return *d;
    if (const auto* i = std::get_if<std::int64_t>(&cell)) return static_cast<double>(*i);
    throw_precondition("report::Table::number", "column " + name + " is not numeric");
}

std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

std::string format_cell(const Cell& cell) {
    if (const auto* d = std::get_if<double>(&cell)) return format_number(*d);
    if (const auto* i = std::get_if<std::int64_t>(&cell)) return std::to_string(*i);
    return std::get<std::string>(cell);
}

std::string to_csv(const Table& table) {
    std::string out;
    for (std::size_t i = 0; i < table.columns.size(); ++i) {
        if (i) out += ',';
        out += table.columns[i];
    }
    out += '\n';
    for (const auto& row : table.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) out += ',';
            out += format_cell(row[i]);
        }
        out += '\n';
    }
    for (const auto& [k, v] : table.metadata) out += "# " + k + "=" + v + "\n";
    return out;
}

Table parse_csv(std::string_view text) {
    Table table;
    bool header = true;
    for (auto line : split(text, '\n')) {
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.empty()) continue;
        if (line.starts_with("# ")) {
            line.remove_prefix(2);
            const auto eq = line.find('=');
            if (eq == std::string_view::npos) {
                table.metadata.emplace_back(std::string(line), "");
            } else {
                table.metadata.emplace_back(std::string(line.substr(0, eq)), std::string(line.substr(eq + 1)));
            }
            continue;
        }
        const auto fields = split(line, ',');
        if (header) {
            for (auto f : fields) table.columns.emplace_back(f);
            header = false;
            continue;
        }
        if (fields.size() != table.columns.size()) {
            throw_precondition("report::parse_csv", "row with " + std::to_string(fields.size()) +
                                                        " fields under a header of " +
                                                        std::to_string(table.columns.size()));
        }
        std::vector<Cell> row;
        for (auto f : fields) row.push_back(parse_cell(f));
        table.rows.push_back(std::move(row));
    }
    return table;
}

void write_file(const std::string& path, const std::string& contents) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw_precondition("report::write_file", "cannot open " + path + ": " + std::strerror(errno));
    out << contents;
    if (!out) throw_precondition("report::write_file", "write failed for " + path);
}

}  // namespace powerplan::report
