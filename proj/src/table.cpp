#include "sfse/table.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

#include "sfse/error.hpp"

namespace sfse {

namespace {

std::string format_number(double value) {
    if (std::isnan(value)) return "nan";
    return fmt::format("{}", value);
}

Cell parse_cell(const std::string& text) {
    if (text == "nan") return std::nan("");
    long long integer = 0;
    auto [iend, ierr] = std::from_chars(text.data(), text.data() + text.size(), integer);
    if (ierr == std::errc() && iend == text.data() + text.size()) return integer;
    double real = 0.0;
    auto [dend, derr] = std::from_chars(text.data(), text.data() + text.size(), real);
    if (derr == std::errc() && dend == text.data() + text.size()) return real;
    return text;
}

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream is(line);
    while (std::getline(is, field, ',')) out.push_back(field);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

}  // namespace

void Table::add_row(std::vector<Cell> row) {
    if (row.size() != columns.size())
        throw DomainError("table row has " + std::to_string(row.size()) + " cells, expected " +
                          std::to_string(columns.size()));
    rows.push_back(std::move(row));
}

std::size_t Table::column(const std::string& name) const {
    for (std::size_t i = 0; i < columns.size(); ++i)
        if (columns[i] == name) return i;
    throw DomainError("no column named " + name);
}

double Table::number(std::size_t row, const std::string& name) const {
    const Cell& cell = rows.at(row).at(column(name));
    if (const auto* d = std::get_if<double>(&cell)) return *d;
    if (const auto* i = std::get_if<long long>(&cell)) return static_cast<double>(*i);
    throw DomainError("column " + name + " is not numeric");
}

OutputFormat parse_format(const std::string& name) {
    if (name == "csv") return OutputFormat::csv;
    if (name == "json") return OutputFormat::json;
    throw ConfigError("unknown output format '" + name + "' (expected csv or json)");
}

const char* extension(OutputFormat format) { return format == OutputFormat::csv ? ".csv" : ".json"; }

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
            std::visit(
                [&](const auto& v) {
                    using T = std::decay_t<decltype(v)>;
                    if constexpr (std::is_same_v<T, double>)
                        out += format_number(v);
                    else if constexpr (std::is_same_v<T, long long>)
                        out += fmt::format("{}", v);
                    else
                        out += v;
                },
                row[i]);
        }
        out += '\n';
    }
    return out;
}

std::string to_json(const Table& table) {
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (const auto& row : table.rows) {
        nlohmann::ordered_json obj = nlohmann::ordered_json::object();
        for (std::size_t i = 0; i < row.size(); ++i) {
            std::visit(
                [&](const auto& v) {
                    using T = std::decay_t<decltype(v)>;
                    if constexpr (std::is_same_v<T, double>) {
                        if (std::isfinite(v))
                            obj[table.columns[i]] = v;
                        else
                            obj[table.columns[i]] = nullptr;
                    } else {
                        obj[table.columns[i]] = v;
                    }
                },
                row[i]);
        }
        rows.push_back(std::move(obj));
    }
    nlohmann::ordered_json doc;
    doc["columns"] = table.columns;
    doc["rows"] = std::move(rows);
    return doc.dump(2) + "\n";
}

void write_atomic(const std::filesystem::path& path, const std::string& contents) {
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
        if (!os) throw ConfigError("cannot write " + tmp.string());
        os << contents;
        if (!os) throw ConfigError("failed writing " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw ConfigError("cannot move " + tmp.string() + " to " + path.string() + ": " + ec.message());
}

void write_table(const std::filesystem::path& path_without_extension, const Table& table,
                 OutputFormat format) {
    std::filesystem::path path = path_without_extension;
    path += extension(format);
    write_atomic(path, format == OutputFormat::csv ? to_csv(table) : to_json(table));
}

Table read_csv(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot read " + path.string());
    Table table;
    std::string line;
    if (!std::getline(is, line)) throw ConfigError(path.string() + " is empty");
    table.columns = split(line);
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::vector<Cell> row;
        for (const auto& field : split(line)) row.push_back(parse_cell(field));
        table.add_row(std::move(row));
    }
    return table;
}

}  // namespace sfse
