#pragma once

#include <filesystem>
#include <string>
#include <variant>
#include <vector>

namespace sfse {

using Cell = std::variant<long long, double, std::string>;

// Column-labelled rows; the unit of every file the CLI writes.
struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;

    void add_row(std::vector<Cell> row);
    std::size_t column(const std::string& name) const;
    double number(std::size_t row, const std::string& name) const;
};

enum class OutputFormat { csv, json };

OutputFormat parse_format(const std::string& name);
const char* extension(OutputFormat format);

// Doubles use the shortest representation that round-trips; NaN is "nan"
// in CSV and null in JSON. Output is byte-stable for identical tables.
std::string to_csv(const Table& table);
std::string to_json(const Table& table);

// Writes via a temporary sibling file and a rename.
void write_atomic(const std::filesystem::path& path, const std::string& contents);
void write_table(const std::filesystem::path& path_without_extension, const Table& table,
                 OutputFormat format);

// Reads a CSV written by to_csv. Numeric-looking cells come back as double
// (or long long for integers), others as strings.
Table read_csv(const std::filesystem::path& path);

}  // namespace sfse
