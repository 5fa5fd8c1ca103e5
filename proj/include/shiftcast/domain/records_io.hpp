#pragma once

#include <array>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "shiftcast/domain/types.hpp"
#include "shiftcast/io/csv.hpp"

namespace shiftcast::domain {

inline constexpr std::array<std::string_view, 7> kSpiColumns{
    "board_id", "component_id", "pad_index", "offset_x_um", "offset_y_um", "angle_deg",
    "volume_pct"};

inline constexpr std::array<std::string_view, 11> kAoiColumns{
    "board_id",           "component_id",       "spec_name",          "setting_id",
    "designed_offset_x_um", "designed_offset_y_um", "designed_angle_deg", "place_pressure_gf",
    "tested_offset_x_um", "tested_offset_y_um", "tested_angle_deg"};

inline constexpr std::array<std::string_view, 16> kFeatureColumns{
    "board_id", "component_id", "setting_id", "spec_name", "x1",  "x2",  "x3",  "x4",
    "x5",       "x6",           "x7",         "x8",        "x9",  "y_x", "y_y", "y_ang"};

inline constexpr int kSettingCount = 33;

std::string spi_csv(std::span<const PasteDeposit> deposits);
std::string aoi_csv(std::span<const PlacementRecord> placements);
std::string features_csv(std::span<const FeatureRow> rows);

/// Schema errors name the column and line. pad_index must be 1 or 2.
std::vector<PasteDeposit> read_deposits(const io::CsvTable& table);
/// Also rejects spec names missing from `specs` (Error(UnknownSpec), with the
/// line number) and setting ids outside [1, 33].
std::vector<PlacementRecord> read_placements(const io::CsvTable& table,
                                             std::span<const ComponentSpec> specs);
/// Targets may be absent (prediction inputs); they then read as 0.
std::vector<FeatureRow> read_features(const io::CsvTable& table, bool require_targets = true);

}  // namespace shiftcast::domain
