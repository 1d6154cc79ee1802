#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace occu {

// Plain comma-separated table with a header row. No quoting: every file this
// project reads or writes is numeric or uses simple tokens.
class CsvTable {
public:
    static CsvTable read(const std::filesystem::path& path);
    static CsvTable parse(std::string_view text, const std::string& source = "<memory>");

    const std::vector<std::string>& header() const { return header_; }
    std::size_t rows() const { return cells_.size(); }
    std::optional<std::size_t> column(const std::string& name) const;
    std::size_t require_column(const std::string& name) const;

    const std::string& cell(std::size_t row, std::size_t col) const { return cells_[row][col]; }
    double number(std::size_t row, std::size_t col) const;
    // 1-based line number of a data row in the source file.
    std::size_t line_of(std::size_t row) const { return lines_[row]; }
    const std::string& source() const { return source_; }

private:
    std::string source_;
    std::vector<std::string> header_;
    std::unordered_map<std::string, std::size_t> index_;
    std::vector<std::vector<std::string>> cells_;
    std::vector<std::size_t> lines_;
};

// Formats doubles with round-trip precision.
std::string format_number(double value);

} // namespace occu
