#pragma once

// Minimal CSV support for the toolkit's flat numeric/identifier tables:
// comma separated, header row required, no quoting, '.' radix.

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace shiftcast::io {

struct CsvRecord {
    std::size_t line = 0;  // 1-based line number in the source
    std::vector<std::string> fields;
};

class CsvTable {
public:
    CsvTable(std::string source, std::vector<std::string> header, std::vector<CsvRecord> records)
        : source_(std::move(source)), header_(std::move(header)), records_(std::move(records)) {}

    [[nodiscard]] const std::string& source() const noexcept { return source_; }
    [[nodiscard]] const std::vector<std::string>& header() const noexcept { return header_; }
    [[nodiscard]] const std::vector<CsvRecord>& records() const noexcept { return records_; }

    /// Column position of `name`; throws Error(Schema) naming the column if absent.
    [[nodiscard]] std::size_t column(std::string_view name) const;
    [[nodiscard]] bool has_column(std::string_view name) const noexcept;

    /// Throws Error(Schema) naming column, line and offending text.
    [[nodiscard]] double number(const CsvRecord& record, std::size_t column) const;
    [[nodiscard]] long long integer(const CsvRecord& record, std::size_t column) const;
    [[nodiscard]] const std::string& text(const CsvRecord& record, std::size_t column) const;

private:
    std::string source_;
    std::vector<std::string> header_;
    std::vector<CsvRecord> records_;
};

/// An empty stream yields a table with no header and no records.
CsvTable read_csv(std::istream& in, std::string source);
CsvTable read_csv_file(const std::filesystem::path& path);

/// Shortest decimal (no exponent) that parses back to exactly `value`.
std::string format_number(double value);

/// Joins fields with commas and appends '\n'.
std::string csv_line(std::span<const std::string> fields);

/// Writes `content` to `path`, throwing Error(Io) on failure.
void write_text_file(const std::filesystem::path& path, std::string_view content);

}  // namespace shiftcast::io
