#include "shiftcast/domain/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <tuple>

#include "shiftcast/error.hpp"

namespace shiftcast::domain {
namespace {

const std::array<ComponentSpec, 6> kBuiltinSpecs{{
    {"R01005", ComponentKind::Resistor, 400.0, 200.0},
    {"R0201", ComponentKind::Resistor, 600.0, 300.0},
    {"R0402", ComponentKind::Resistor, 1000.0, 500.0},
    {"C01005", ComponentKind::Capacitor, 400.0, 200.0},
    {"C0201", ComponentKind::Capacitor, 600.0, 300.0},
    {"C0402", ComponentKind::Capacitor, 1000.0, 500.0},
}};

void require_finite(double value, const char* field) {
    if (!std::isfinite(value)) {
        throw Error(ErrorKind::NonFiniteInput, std::string(field) + " is not finite");
    }
}

using Key = std::pair<std::string, std::string>;

DirectionStats describe(const std::vector<double>& values) {
    DirectionStats s;
    const auto n = static_cast<double>(values.size());
    double sum = 0.0;
    s.min = values.front();
    s.max = values.front();
    for (double v : values) {
        sum += v;
        s.min = std::min(s.min, v);
        s.max = std::max(s.max, v);
    }
    if (s.min == s.max) {
        s.avg = s.min;
        return s;
    }
    s.avg = sum / n;
    if (values.size() > 1) {
        double ss = 0.0;
        for (double v : values) {
            ss += (v - s.avg) * (v - s.avg);
        }
        s.std = std::sqrt(ss / (n - 1.0));
    }
    // Rounding in the mean can push it a hair outside [min, max] for constant input.
    s.avg = std::clamp(s.avg, s.min, s.max);
    return s;
}

}  // namespace

std::span<const ComponentSpec> builtin_specs() noexcept { return kBuiltinSpecs; }

const ComponentSpec* find_spec(std::span<const ComponentSpec> specs,
                               std::string_view name) noexcept {
    const auto it = std::find_if(specs.begin(), specs.end(),
                                 [&](const ComponentSpec& s) { return s.name == name; });
    return it == specs.end() ? nullptr : &*it;
}

std::string_view target_name(Target target) noexcept {
    switch (target) {
        case Target::ShiftX: return "shift_x_ratio";
        case Target::ShiftY: return "shift_y_ratio";
        case Target::ShiftAngle: return "shift_angle_deg";
    }
    return "unknown";
}

std::optional<Target> parse_target(std::string_view text) noexcept {
    for (Target t : kAllTargets) {
        if (text == target_name(t)) {
            return t;
        }
    }
    if (text == "x") return Target::ShiftX;
    if (text == "y") return Target::ShiftY;
    if (text == "angle") return Target::ShiftAngle;
    return std::nullopt;
}

std::string_view to_string(OrphanReason reason) noexcept {
    switch (reason) {
        case OrphanReason::NoDeposits: return "no_deposits";
        case OrphanReason::MissingDeposit: return "missing_deposit";
        case OrphanReason::DuplicatePad: return "duplicate_pad";
        case OrphanReason::DuplicatePlacement: return "duplicate_placement";
    }
    return "unknown";
}

DepositPair pair_deposits(std::span<const PasteDeposit> deposits) {
    if (deposits.size() != 2) {
        throw Error(ErrorKind::MissingDeposit,
                    "expected 2 deposits, got " + std::to_string(deposits.size()));
    }
    const PasteDeposit& a = deposits[0];
    const PasteDeposit& b = deposits[1];
    if (a.board_id != b.board_id || a.component_id != b.component_id) {
        throw Error(ErrorKind::InvalidRecord, "deposits belong to different components");
    }
    for (const PasteDeposit* d : {&a, &b}) {
        if (d->pad_index != 1 && d->pad_index != 2) {
            throw Error(ErrorKind::InvalidRecord,
                        "pad_index must be 1 or 2, got " + std::to_string(d->pad_index));
        }
    }
    if (a.pad_index == b.pad_index) {
        throw Error(ErrorKind::DuplicatePad, a.board_id + "/" + a.component_id + " has two pad " +
                                                 std::to_string(a.pad_index) + " deposits");
    }
    return a.pad_index == 1 ? DepositPair{a, b} : DepositPair{b, a};
}

FeatureRow featurize(const DepositPair& pair, const PlacementRecord& placement,
                     const ComponentSpec& spec) {
    if (!(spec.length_um > 0.0) || !(spec.width_um > 0.0)) {
        throw Error(ErrorKind::NonPositiveDimension, spec.name + " has a non-positive dimension");
    }
    for (const PasteDeposit* d : {&pair.pad1, &pair.pad2}) {
        require_finite(d->offset_x_um, "offset_x_um");
        require_finite(d->offset_y_um, "offset_y_um");
        require_finite(d->angle_deg, "angle_deg");
        require_finite(d->volume_pct, "volume_pct");
        if (!(d->volume_pct > 0.0)) {
            throw Error(ErrorKind::InvalidRecord, "volume_pct must be positive");
        }
    }
    require_finite(placement.designed_offset_x_um, "designed_offset_x_um");
    require_finite(placement.designed_offset_y_um, "designed_offset_y_um");
    require_finite(placement.designed_angle_deg, "designed_angle_deg");
    require_finite(placement.place_pressure_gf, "place_pressure_gf");
    require_finite(placement.tested_offset_x_um, "tested_offset_x_um");
    require_finite(placement.tested_offset_y_um, "tested_offset_y_um");
    require_finite(placement.tested_angle_deg, "tested_angle_deg");

    const double length = spec.length_um;
    const double width = spec.width_um;
    const PasteDeposit& p1 = pair.pad1;
    const PasteDeposit& p2 = pair.pad2;

    FeatureRow row;
    row.board_id = placement.board_id;
    row.component_id = placement.component_id;
    row.setting_id = placement.setting_id;
    row.spec_name = placement.spec_name;
    // Paste-pair center is the mean of the two deposits.
    row.x[0] = 0.5 * (p1.offset_x_um + p2.offset_x_um) / length;
    row.x[1] = 0.5 * (p1.offset_y_um + p2.offset_y_um) / width;
    row.x[2] = 0.5 * (p1.angle_deg + p2.angle_deg);
    row.x[3] = 0.5 * (p1.volume_pct + p2.volume_pct) / 100.0;
    row.x[4] = (p1.volume_pct - p2.volume_pct) / 100.0;
    row.x[5] = placement.designed_offset_x_um / length;
    row.x[6] = placement.designed_offset_y_um / width;
    row.x[7] = placement.designed_angle_deg;
    row.x[8] = placement.place_pressure_gf;
    row.y_x = placement.tested_offset_x_um / length - row.x[5];
    row.y_y = placement.tested_offset_y_um / width - row.x[6];
    row.y_ang = placement.tested_angle_deg - placement.designed_angle_deg;
    return row;
}

JoinResult join_spi_aoi(std::span<const PasteDeposit> deposits,
                        std::span<const PlacementRecord> placements,
                        std::span<const ComponentSpec> specs) {
    std::map<Key, std::vector<PasteDeposit>> by_component;
    for (const PasteDeposit& d : deposits) {
        by_component[{d.board_id, d.component_id}].push_back(d);
    }

    std::vector<const PlacementRecord*> ordered;
    ordered.reserve(placements.size());
    for (const PlacementRecord& p : placements) {
        if (find_spec(specs, p.spec_name) == nullptr) {
            throw Error(ErrorKind::UnknownSpec, p.board_id + "/" + p.component_id +
                                                    " names unknown spec '" + p.spec_name + "'");
        }
        ordered.push_back(&p);
    }
    std::stable_sort(ordered.begin(), ordered.end(), [](const auto* a, const auto* b) {
        return std::tie(a->board_id, a->component_id) < std::tie(b->board_id, b->component_id);
    });

    JoinResult result;
    result.rows.reserve(ordered.size());
    std::map<Key, bool> claimed;
    for (const PlacementRecord* p : ordered) {
        const Key key{p->board_id, p->component_id};
        if (claimed.contains(key)) {
            result.diagnostics.orphan_placements.push_back(
                {p->board_id, p->component_id, OrphanReason::DuplicatePlacement});
            continue;
        }
        claimed[key] = true;
        const auto it = by_component.find(key);
        if (it == by_component.end()) {
            result.diagnostics.orphan_placements.push_back(
                {p->board_id, p->component_id, OrphanReason::NoDeposits});
            continue;
        }
        if (it->second.size() != 2) {
            result.diagnostics.orphan_placements.push_back(
                {p->board_id, p->component_id, OrphanReason::MissingDeposit});
            continue;
        }
        if (it->second[0].pad_index == it->second[1].pad_index) {
            result.diagnostics.orphan_placements.push_back(
                {p->board_id, p->component_id, OrphanReason::DuplicatePad});
            continue;
        }
        const DepositPair pair = pair_deposits(it->second);
        result.rows.push_back(featurize(pair, *p, *find_spec(specs, p->spec_name)));
    }

    for (const auto& [key, group] : by_component) {
        if (claimed.contains(key)) {
            continue;
        }
        for (const PasteDeposit& d : group) {
            result.diagnostics.orphan_deposits.push_back({d.board_id, d.component_id, d.pad_index});
        }
    }
    return result;
}

std::vector<ShiftSummary> shift_summary(std::span<const FeatureRow> rows,
                                        const ComponentSpec& spec) {
    if (!(spec.length_um > 0.0) || !(spec.width_um > 0.0)) {
        throw Error(ErrorKind::NonPositiveDimension, spec.name + " has a non-positive dimension");
    }
    struct Group {
        std::vector<double> x, y, angle;
    };
    std::map<int, Group> groups;
    for (const FeatureRow& row : rows) {
        if (row.spec_name != spec.name) {
            throw Error(ErrorKind::MixedSpec,
                        "row " + row.component_id + " is " + row.spec_name + ", not " + spec.name);
        }
        Group& g = groups[row.setting_id];
        g.x.push_back(row.y_x * spec.length_um);
        g.y.push_back(row.y_y * spec.width_um);
        g.angle.push_back(row.y_ang);
    }
    std::vector<ShiftSummary> out;
    out.reserve(groups.size());
    for (const auto& [setting, g] : groups) {
        out.push_back({setting, describe(g.x), describe(g.y), describe(g.angle), g.x.size()});
    }
    return out;
}

}  // namespace shiftcast::domain
