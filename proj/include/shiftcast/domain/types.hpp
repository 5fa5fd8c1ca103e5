#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace shiftcast::domain {

enum class ComponentKind { Resistor, Capacitor };

struct ComponentSpec {
    std::string name;
    ComponentKind kind = ComponentKind::Resistor;
    double length_um = 0.0;
    double width_um = 0.0;
};

/// The six chip types of the experiment (R/C 01005, 0201, 0402).
std::span<const ComponentSpec> builtin_specs() noexcept;
/// Null when `name` is not in `specs`.
const ComponentSpec* find_spec(std::span<const ComponentSpec> specs, std::string_view name) noexcept;

/// One SPI measurement of one solder-paste deposit; two per component.
struct PasteDeposit {
    std::string board_id;
    std::string component_id;
    int pad_index = 1;
    double offset_x_um = 0.0;
    double offset_y_um = 0.0;
    double angle_deg = 0.0;
    double volume_pct = 100.0;
};

/// Designed placement (DOE) plus the AOI-tested position of one component.
struct PlacementRecord {
    std::string board_id;
    std::string component_id;
    std::string spec_name;
    int setting_id = 1;
    double designed_offset_x_um = 0.0;
    double designed_offset_y_um = 0.0;
    double designed_angle_deg = 0.0;
    double place_pressure_gf = 0.0;
    double tested_offset_x_um = 0.0;
    double tested_offset_y_um = 0.0;
    double tested_angle_deg = 0.0;
};

enum class Target { ShiftX, ShiftY, ShiftAngle };

inline constexpr std::array<Target, 3> kAllTargets{Target::ShiftX, Target::ShiftY,
                                                   Target::ShiftAngle};
inline constexpr std::size_t kFeatureCount = 9;
inline constexpr std::array<std::string_view, kFeatureCount> kFeatureNames{
    "x1", "x2", "x3", "x4", "x5", "x6", "x7", "x8", "x9"};

/// "shift_x_ratio", "shift_y_ratio" or "shift_angle_deg".
std::string_view target_name(Target target) noexcept;
/// Accepts the target names above and the short forms "x", "y", "angle".
std::optional<Target> parse_target(std::string_view text) noexcept;

/// Predictors and shift targets of one placed component.
///
///   x1 paste offset X / length     x6 designed part offset X / length
///   x2 paste offset Y / width      x7 designed part offset Y / width
///   x3 paste angle (deg)           x8 designed part angle (deg)
///   x4 mean paste volume / 100     x9 place pressure (gf)
///   x5 (pad1 - pad2 volume) / 100
///
///   y_x = tested X / length - x6, y_y = tested Y / width - x7,
///   y_ang = tested angle - designed angle.
struct FeatureRow {
    std::string board_id;
    std::string component_id;
    int setting_id = 0;
    std::string spec_name;
    std::array<double, kFeatureCount> x{};
    double y_x = 0.0;
    double y_y = 0.0;
    double y_ang = 0.0;

    [[nodiscard]] double target(Target t) const noexcept {
        switch (t) {
            case Target::ShiftX: return y_x;
            case Target::ShiftY: return y_y;
            case Target::ShiftAngle: return y_ang;
        }
        return 0.0;
    }

    friend bool operator==(const FeatureRow&, const FeatureRow&) = default;
};

struct DirectionStats {
    double avg = 0.0;
    double std = 0.0;
    double min = 0.0;
    double max = 0.0;
};

/// Per-setting shift statistics in physical units (um, um, deg).
struct ShiftSummary {
    int setting_id = 0;
    DirectionStats x_um;
    DirectionStats y_um;
    DirectionStats angle_deg;
    std::size_t count = 0;
};

}  // namespace shiftcast::domain
