#include "shiftcast/domain/records_io.hpp"

#include "shiftcast/domain/pipeline.hpp"
#include "shiftcast/error.hpp"

namespace shiftcast::domain {
namespace {

template <std::size_t N>
std::string header_line(const std::array<std::string_view, N>& columns) {
    std::string out;
    for (std::size_t i = 0; i < N; ++i) {
        if (i > 0) {
            out += ',';
        }
        out += columns[i];
    }
    out += '\n';
    return out;
}

std::string where(const io::CsvTable& table, const io::CsvRecord& record) {
    return table.source() + ":" + std::to_string(record.line);
}

}  // namespace

std::string spi_csv(std::span<const PasteDeposit> deposits) {
    std::string out = header_line(kSpiColumns);
    for (const auto& d : deposits) {
        const std::array<std::string, 7> fields{d.board_id,
                                                d.component_id,
                                                std::to_string(d.pad_index),
                                                io::format_number(d.offset_x_um),
                                                io::format_number(d.offset_y_um),
                                                io::format_number(d.angle_deg),
                                                io::format_number(d.volume_pct)};
        out += io::csv_line(fields);
    }
    return out;
}

std::string aoi_csv(std::span<const PlacementRecord> placements) {
    std::string out = header_line(kAoiColumns);
    for (const auto& p : placements) {
        const std::array<std::string, 11> fields{p.board_id,
                                                 p.component_id,
                                                 p.spec_name,
                                                 std::to_string(p.setting_id),
                                                 io::format_number(p.designed_offset_x_um),
                                                 io::format_number(p.designed_offset_y_um),
                                                 io::format_number(p.designed_angle_deg),
                                                 io::format_number(p.place_pressure_gf),
                                                 io::format_number(p.tested_offset_x_um),
                                                 io::format_number(p.tested_offset_y_um),
                                                 io::format_number(p.tested_angle_deg)};
        out += io::csv_line(fields);
    }
    return out;
}

std::string features_csv(std::span<const FeatureRow> rows) {
    std::string out = header_line(kFeatureColumns);
    std::vector<std::string> fields;
    for (const auto& r : rows) {
        fields.clear();
        fields.push_back(r.board_id);
        fields.push_back(r.component_id);
        fields.push_back(std::to_string(r.setting_id));
        fields.push_back(r.spec_name);
        for (double v : r.x) {
            fields.push_back(io::format_number(v));
        }
        fields.push_back(io::format_number(r.y_x));
        fields.push_back(io::format_number(r.y_y));
        fields.push_back(io::format_number(r.y_ang));
        out += io::csv_line(fields);
    }
    return out;
}

std::vector<PasteDeposit> read_deposits(const io::CsvTable& table) {
    std::vector<PasteDeposit> out;
    if (table.header().empty()) {
        return out;
    }
    std::array<std::size_t, 7> col{};
    for (std::size_t i = 0; i < col.size(); ++i) {
        col[i] = table.column(kSpiColumns[i]);
    }
    out.reserve(table.records().size());
    for (const auto& rec : table.records()) {
        PasteDeposit d;
        d.board_id = table.text(rec, col[0]);
        d.component_id = table.text(rec, col[1]);
        const long long pad = table.integer(rec, col[2]);
        if (pad != 1 && pad != 2) {
            throw Error(ErrorKind::Schema,
                        where(table, rec) + ": column 'pad_index' must be 1 or 2");
        }
        d.pad_index = static_cast<int>(pad);
        d.offset_x_um = table.number(rec, col[3]);
        d.offset_y_um = table.number(rec, col[4]);
        d.angle_deg = table.number(rec, col[5]);
        d.volume_pct = table.number(rec, col[6]);
        if (!(d.volume_pct > 0.0)) {
            throw Error(ErrorKind::Schema,
                        where(table, rec) + ": column 'volume_pct' must be positive");
        }
        out.push_back(std::move(d));
    }
    return out;
}

std::vector<PlacementRecord> read_placements(const io::CsvTable& table,
                                             std::span<const ComponentSpec> specs) {
    std::vector<PlacementRecord> out;
    if (table.header().empty()) {
        return out;
    }
    std::array<std::size_t, 11> col{};
    for (std::size_t i = 0; i < col.size(); ++i) {
        col[i] = table.column(kAoiColumns[i]);
    }
    out.reserve(table.records().size());
    for (const auto& rec : table.records()) {
        PlacementRecord p;
        p.board_id = table.text(rec, col[0]);
        p.component_id = table.text(rec, col[1]);
        p.spec_name = table.text(rec, col[2]);
        if (find_spec(specs, p.spec_name) == nullptr) {
            throw Error(ErrorKind::UnknownSpec, where(table, rec) + ": column 'spec_name' names "
                                                                    "unknown spec '" +
                                                    p.spec_name + "'");
        }
        const long long setting = table.integer(rec, col[3]);
        if (setting < 1 || setting > kSettingCount) {
            throw Error(ErrorKind::Schema,
                        where(table, rec) + ": column 'setting_id' must be in [1, 33]");
        }
        p.setting_id = static_cast<int>(setting);
        p.designed_offset_x_um = table.number(rec, col[4]);
        p.designed_offset_y_um = table.number(rec, col[5]);
        p.designed_angle_deg = table.number(rec, col[6]);
        p.place_pressure_gf = table.number(rec, col[7]);
        if (p.place_pressure_gf < 0.0) {
            throw Error(ErrorKind::Schema,
                        where(table, rec) + ": column 'place_pressure_gf' must be >= 0");
        }
        p.tested_offset_x_um = table.number(rec, col[8]);
        p.tested_offset_y_um = table.number(rec, col[9]);
        p.tested_angle_deg = table.number(rec, col[10]);
        out.push_back(std::move(p));
    }
    return out;
}

std::vector<FeatureRow> read_features(const io::CsvTable& table, bool require_targets) {
    std::vector<FeatureRow> out;
    if (table.header().empty()) {
        return out;
    }
    const std::size_t board = table.column("board_id");
    const std::size_t component = table.column("component_id");
    const std::size_t setting = table.column("setting_id");
    const std::size_t spec = table.column("spec_name");
    std::array<std::size_t, kFeatureCount> xcol{};
    for (std::size_t i = 0; i < kFeatureCount; ++i) {
        xcol[i] = table.column(kFeatureNames[i]);
    }
    const bool has_targets =
        table.has_column("y_x") && table.has_column("y_y") && table.has_column("y_ang");
    std::array<std::size_t, 3> ycol{};
    if (require_targets || has_targets) {
        ycol = {table.column("y_x"), table.column("y_y"), table.column("y_ang")};
    }
    out.reserve(table.records().size());
    for (const auto& rec : table.records()) {
        FeatureRow r;
        r.board_id = table.text(rec, board);
        r.component_id = table.text(rec, component);
        r.setting_id = static_cast<int>(table.integer(rec, setting));
        r.spec_name = table.text(rec, spec);
        for (std::size_t i = 0; i < kFeatureCount; ++i) {
            r.x[i] = table.number(rec, xcol[i]);
        }
        if (require_targets || has_targets) {
            r.y_x = table.number(rec, ycol[0]);
            r.y_y = table.number(rec, ycol[1]);
            r.y_ang = table.number(rec, ycol[2]);
        }
        out.push_back(std::move(r));
    }
    return out;
}

}  // namespace shiftcast::domain
