#include "shiftcast/io/csv.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <system_error>

#include "shiftcast/error.hpp"

namespace shiftcast::io {
namespace {

std::vector<std::string> split(std::string_view line) {
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            fields.emplace_back(line.substr(start));
            break;
        }
        fields.emplace_back(line.substr(start, comma - start));
        start = comma + 1;
    }
    return fields;
}

std::string location(const std::string& source, std::size_t line) {
    return source + ":" + std::to_string(line);
}

}  // namespace

std::size_t CsvTable::column(std::string_view name) const {
    for (std::size_t c = 0; c < header_.size(); ++c) {
        if (header_[c] == name) {
            return c;
        }
    }
    throw Error(ErrorKind::Schema, source_ + ": missing column '" + std::string(name) + "'");
}

bool CsvTable::has_column(std::string_view name) const noexcept {
    for (const auto& h : header_) {
        if (h == name) {
            return true;
        }
    }
    return false;
}

const std::string& CsvTable::text(const CsvRecord& record, std::size_t column) const {
    return record.fields.at(column);
}

double CsvTable::number(const CsvRecord& record, std::size_t column) const {
    const std::string& field = record.fields.at(column);
    double value = 0.0;
    const char* first = field.data();
    const char* last = field.data() + field.size();
    const auto [ptr, ec] = std::from_chars(first, last, value, std::chars_format::general);
    if (ec != std::errc{} || ptr != last || field.empty() || !std::isfinite(value)) {
        throw Error(ErrorKind::Schema, location(source_, record.line) + ": column '" +
                                           header_[column] + "' is not a finite number: '" +
                                           field + "'");
    }
    return value;
}

long long CsvTable::integer(const CsvRecord& record, std::size_t column) const {
    const std::string& field = record.fields.at(column);
    long long value = 0;
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (ec != std::errc{} || ptr != field.data() + field.size() || field.empty()) {
        throw Error(ErrorKind::Schema, location(source_, record.line) + ": column '" +
                                           header_[column] + "' is not an integer: '" + field +
                                           "'");
    }
    return value;
}

CsvTable read_csv(std::istream& in, std::string source) {
    std::vector<std::string> header;
    std::vector<CsvRecord> records;
    std::string line;
    std::size_t line_no = 0;
    bool have_header = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty()) {
            continue;
        }
        if (!have_header) {
            header = split(line);
            have_header = true;
            continue;
        }
        auto fields = split(line);
        if (fields.size() != header.size()) {
            throw Error(ErrorKind::Schema, location(source, line_no) + ": expected " +
                                               std::to_string(header.size()) + " fields, got " +
                                               std::to_string(fields.size()));
        }
        records.push_back({line_no, std::move(fields)});
    }
    return CsvTable(std::move(source), std::move(header), std::move(records));
}

CsvTable read_csv_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorKind::Io, "cannot open " + path.string());
    }
    return read_csv(in, path.string());
}

std::string format_number(double value) {
    std::array<char, 512> buffer{};
    if (value == 0.0) {
        return "0";  // also folds -0
    }
    const auto [ptr, ec] =
        std::to_chars(buffer.data(), buffer.data() + buffer.size(), value, std::chars_format::fixed);
    if (ec != std::errc{}) {
        throw Error(ErrorKind::Io, "cannot format number");
    }
    return std::string(buffer.data(), ptr);
}

std::string csv_line(std::span<const std::string> fields) {
    std::string out;
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i > 0) {
            out += ',';
        }
        out += fields[i];
    }
    out += '\n';
    return out;
}

void write_text_file(const std::filesystem::path& path, std::string_view content) {
    if (path.has_parent_path()) {
        std::error_code ec;
        std::filesystem::create_directories(path.parent_path(), ec);
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw Error(ErrorKind::Io, "cannot write " + path.string());
    }
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) {
        throw Error(ErrorKind::Io, "failed writing " + path.string());
    }
}

}  // namespace shiftcast::io
