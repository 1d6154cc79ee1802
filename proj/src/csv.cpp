#include "occu/csv.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "occu/error.hpp"

namespace occu {

namespace {

std::string trim(std::string_view s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && (s[b] == ' ' || s[b] == '\t' || s[b] == '\r')) {
        ++b;
    }
    while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r')) {
        --e;
    }
    return std::string(s.substr(b, e - b));
}

std::vector<std::string> split(std::string_view line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            out.push_back(trim(line.substr(start)));
            break;
        }
        out.push_back(trim(line.substr(start, comma - start)));
        start = comma + 1;
    }
    return out;
}

} // namespace

CsvTable CsvTable::read(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw DataError("cannot open " + path.string());
    }
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse(buffer.str(), path.string());
}

CsvTable CsvTable::parse(std::string_view text, const std::string& source) {
    CsvTable table;
    table.source_ = source;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    bool have_header = false;
    while (pos <= text.size()) {
        std::size_t nl = text.find('\n', pos);
        if (nl == std::string_view::npos) {
            nl = text.size();
        }
        std::string_view line = text.substr(pos, nl - pos);
        pos = nl + 1;
        ++line_no;
        if (trim(line).empty() || line.front() == '#') {
            if (nl == text.size()) {
                break;
            }
            continue;
        }
        auto fields = split(line);
        if (!have_header) {
            table.header_ = fields;
            for (std::size_t i = 0; i < fields.size(); ++i) {
                table.index_[fields[i]] = i;
            }
            have_header = true;
        } else {
            if (fields.size() != table.header_.size()) {
                throw DataError(source + ":" + std::to_string(line_no) + ": expected " +
                                std::to_string(table.header_.size()) + " fields, found " +
                                std::to_string(fields.size()));
            }
            table.cells_.push_back(std::move(fields));
            table.lines_.push_back(line_no);
        }
        if (nl == text.size()) {
            break;
        }
    }
    if (!have_header) {
        throw DataError(source + ": empty file");
    }
    return table;
}

std::optional<std::size_t> CsvTable::column(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) {
        return std::nullopt;
    }
    return it->second;
}

std::size_t CsvTable::require_column(const std::string& name) const {
    auto col = column(name);
    if (!col) {
        throw DataError(source_ + ": missing column '" + name + "'");
    }
    return *col;
}

double CsvTable::number(std::size_t row, std::size_t col) const {
    const std::string& s = cells_[row][col];
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc() || ptr != s.data() + s.size()) {
        if (s == "nan" || s == "NaN") {
            return std::nan("");
        }
        throw DataError(source_ + ":" + std::to_string(lines_[row]) + ": '" + s +
                        "' in column '" + header_[col] + "' is not a number");
    }
    return value;
}

std::string format_number(double value) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, ptr);
}

} // namespace occu
