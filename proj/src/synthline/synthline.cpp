#include "shiftcast/synthline/synthline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <random>

#include <json.hpp>

#include "shiftcast/domain/records_io.hpp"
#include "shiftcast/error.hpp"
#include "shiftcast/io/csv.hpp"

namespace shiftcast::synthline {
namespace {

constexpr std::size_t kSyntheticRows = 27;  // settings 6..32
constexpr double kReferenceLength = 1000.0;
constexpr double kReferenceWidth = 500.0;

std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

double round2(double v) { return std::round(v * 100.0) / 100.0; }

// One stratified draw per row over [lo, hi], strata visited in shuffled order.
std::vector<double> lhs_column(std::mt19937_64& rng, double lo, double hi) {
    std::vector<std::size_t> strata(kSyntheticRows);
    std::iota(strata.begin(), strata.end(), std::size_t{0});
    std::shuffle(strata.begin(), strata.end(), rng);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<double> out(kSyntheticRows);
    const auto m = static_cast<double>(kSyntheticRows);
    for (std::size_t i = 0; i < kSyntheticRows; ++i) {
        out[i] = round2(lo + (hi - lo) * (static_cast<double>(strata[i]) + unit(rng)) / m);
    }
    return out;
}

// Levels cycled as evenly as possible, then shuffled.
std::vector<double> level_column(std::mt19937_64& rng, std::span<const double> levels) {
    std::vector<double> out(kSyntheticRows);
    for (std::size_t i = 0; i < kSyntheticRows; ++i) {
        out[i] = levels[i % levels.size()];
    }
    std::shuffle(out.begin(), out.end(), rng);
    return out;
}

void require_std(double v, const char* name) {
    if (!std::isfinite(v) || v < 0.0) {
        throw Error(ErrorKind::InvalidConfig, std::string(name) + " must be finite and >= 0");
    }
}

std::string padded(std::size_t value, std::size_t width) {
    std::string s = std::to_string(value);
    if (s.size() < width) s.insert(0, width - s.size(), '0');
    return s;
}

}  // namespace

std::vector<DoeSetting> builtin_design() {
    const DoeSetting s1{1, 76.84, 71.12, -6.92, 80.0, 0.0, 235.37, 0.0, -6.92, 150.0};
    const DoeSetting s2{2, 76.84, 71.12, 6.92, 120.0, -40.0, 158.43, 0.0, 0.0, 0.0};
    const DoeSetting s3{3, 76.84, 71.12, 6.92, 120.0, 0.0, 76.85, 71.12, 0.0, 150.0};
    const DoeSetting s4{4, 65.92, 129.56, -6.92, 80.0, -40.0, 81.49, 0.0, 0.0, 150.0};
    const DoeSetting s5{5, 175.00, 84.00, 6.92, 120.0, -40.0, 253.96, 94.36, 0.0, 0.0};
    const DoeSetting s33{33, 141.76, 220.23, 6.91, 120.0, 0.0, 170.73, 111.81, 0.0, 150.0};

    std::mt19937_64 rng(kDesignSeed);
    const std::array<double, 4> angles{-6.92, 0.0, 6.91, 6.92};
    const std::array<double, 2> volumes{80.0, 120.0};
    const std::array<double, 2> diffs{-40.0, 0.0};
    const std::array<double, 2> pressures{0.0, 150.0};
    const auto paste_x = lhs_column(rng, 65.92, 175.00);
    const auto paste_y = lhs_column(rng, 71.12, 220.23);
    const auto paste_angle = level_column(rng, angles);
    const auto volume = level_column(rng, volumes);
    const auto diff = level_column(rng, diffs);
    const auto part_x = lhs_column(rng, 76.85, 253.96);
    const auto part_y = lhs_column(rng, 0.0, 111.81);
    const auto part_angle = level_column(rng, angles);
    const auto pressure = level_column(rng, pressures);

    std::vector<DoeSetting> design{s1, s2, s3, s4, s5};
    for (std::size_t i = 0; i < kSyntheticRows; ++i) {
        design.push_back({static_cast<int>(6 + i), paste_x[i], paste_y[i], paste_angle[i],
                          volume[i], diff[i], part_x[i], part_y[i], part_angle[i], pressure[i]});
    }
    design.push_back(s33);
    return design;
}

std::string_view to_string(Mode mode) noexcept {
    return mode == Mode::Linear ? "linear" : "nonlinear";
}

Coefficients Coefficients::defaults() {
    Coefficients c;
    // Intercepts put the noise-free setting-1 C0402 shift at
    // (6.8 um, -12.4 um, 2.7 deg) under the nonlinear form.
    c.affine[0] = {0.0137120, 0.1, 0.0, 0.0, 0.0, 0.0, -0.1, 0.0, 0.0, 0.0};
    c.affine[1] = {-0.0468137, 0.0, 0.05, 0.0, 0.0, 0.0, 0.0, -0.05, 0.0, 0.0};
    c.affine[2] = {-0.642833, 0.0, 0.0, 0.02, 0.0, 0.0, 0.0, 0.0, -0.46, 0.0};
    c.nonlinear[0] = {0.6, 0.0, 0.03};
    c.nonlinear[1] = {0.0, 2.0, 0.05};
    c.nonlinear[2] = {2.0, 2.0, 1.0};
    return c;
}

std::array<double, 3> ground_truth(Mode mode, const Coefficients& coefficients,
                                   const std::array<double, domain::kFeatureCount>& x) {
    std::array<double, 3> out{};
    for (std::size_t t = 0; t < 3; ++t) {
        const auto& a = coefficients.affine[t];
        double g = a[0];
        for (std::size_t j = 0; j < domain::kFeatureCount; ++j) {
            g += a[j + 1] * x[j];
        }
        if (mode == Mode::Nonlinear) {
            const auto& b = coefficients.nonlinear[t];
            g += b[0] * x[4] * x[5] + b[1] * x[4] * x[6] + b[2] * std::tanh(4.0 * x[0]);
        }
        out[t] = g;
    }
    return out;
}

GeneratorConfig GeneratorConfig::noiseless() const {
    GeneratorConfig c = *this;
    c.noise_std = {0.0, 0.0, 0.0};
    c.spi_offset_std_um = 0.0;
    c.spi_angle_std_deg = 0.0;
    c.spi_volume_std_pct = 0.0;
    return c;
}

void GeneratorConfig::validate() const {
    require_std(noise_std[0], "noise_std_x");
    require_std(noise_std[1], "noise_std_y");
    require_std(noise_std[2], "noise_std_angle");
    require_std(spi_offset_std_um, "spi_offset_std_um");
    require_std(spi_angle_std_deg, "spi_angle_std_deg");
    require_std(spi_volume_std_pct, "spi_volume_std_pct");
    if (replications == 0) {
        throw Error(ErrorKind::InvalidConfig, "replications must be >= 1");
    }
    for (const auto& row : coefficients.affine) {
        for (double v : row) {
            if (!std::isfinite(v)) throw Error(ErrorKind::InvalidConfig, "non-finite coefficient");
        }
    }
    for (const auto& row : coefficients.nonlinear) {
        for (double v : row) {
            if (!std::isfinite(v)) throw Error(ErrorKind::InvalidConfig, "non-finite coefficient");
        }
    }
}

GeneratedData generate(const GeneratorConfig& config, std::span<const DoeSetting> design,
                       std::span<const domain::ComponentSpec> specs) {
    config.validate();
    GeneratedData out;
    const std::size_t rows = specs.size() * design.size() * config.replications;
    out.deposits.reserve(2 * rows);
    out.placements.reserve(rows);
    out.truth.reserve(rows);
    out.expected.reserve(rows);
    const std::size_t rep_width = std::to_string(config.replications).size();

    for (std::size_t s = 0; s < specs.size(); ++s) {
        const domain::ComponentSpec& spec = specs[s];
        if (!(spec.length_um > 0.0) || !(spec.width_um > 0.0)) {
            throw Error(ErrorKind::NonPositiveDimension, spec.name + " has a non-positive dimension");
        }
        // Independent substream per component type.
        std::mt19937_64 rng(splitmix64(config.seed ^ splitmix64(s + 1)));
        std::normal_distribution<double> normal(0.0, 1.0);
        const double sx = spec.length_um / kReferenceLength;
        const double sy = spec.width_um / kReferenceWidth;
        const std::string board = "BRD-" + spec.name;

        for (const DoeSetting& d : design) {
            for (std::size_t r = 0; r < config.replications; ++r) {
                const std::string component = spec.name + "-S" +
                                              padded(static_cast<std::size_t>(d.setting_id), 2) +
                                              "-R" + padded(r + 1, rep_width);
                // Printed paste: designed value plus SPI-visible perturbation.
                const double cx = (d.paste_offset_x_um + config.spi_offset_std_um * normal(rng)) * sx;
                const double cy = (d.paste_offset_y_um + config.spi_offset_std_um * normal(rng)) * sy;
                const double ca = d.paste_angle_deg + config.spi_angle_std_deg * normal(rng);
                const double avg = d.avg_volume_pct + config.spi_volume_std_pct * normal(rng);
                const double diff = d.diff_volume_pct + config.spi_volume_std_pct * normal(rng);
                // Per-pad spread that cancels in the pair mean.
                const double jx = 0.5 * config.spi_offset_std_um * sx * normal(rng);
                const double jy = 0.5 * config.spi_offset_std_um * sy * normal(rng);
                const double ja = 0.5 * config.spi_angle_std_deg * normal(rng);
                const double v1 = std::max(1.0, avg + 0.5 * diff);
                const double v2 = std::max(1.0, avg - 0.5 * diff);

                out.deposits.push_back({board, component, 1, cx + jx, cy + jy, ca + ja, v1});
                out.deposits.push_back({board, component, 2, cx - jx, cy - jy, ca - ja, v2});

                domain::FeatureRow row;
                row.board_id = board;
                row.component_id = component;
                row.setting_id = d.setting_id;
                row.spec_name = spec.name;
                row.x = {cx / spec.length_um,
                         cy / spec.width_um,
                         ca,
                         0.5 * (v1 + v2) / 100.0,
                         (v1 - v2) / 100.0,
                         d.part_offset_x_um * sx / spec.length_um,
                         d.part_offset_y_um * sy / spec.width_um,
                         d.part_angle_deg,
                         d.place_pressure_gf};
                const auto g = ground_truth(config.mode, config.coefficients, row.x);
                row.y_x = g[0] + config.noise_std[0] * normal(rng);
                row.y_y = g[1] + config.noise_std[1] * normal(rng);
                row.y_ang = g[2] + config.noise_std[2] * normal(rng);

                domain::PlacementRecord p;
                p.board_id = board;
                p.component_id = component;
                p.spec_name = spec.name;
                p.setting_id = d.setting_id;
                p.designed_offset_x_um = d.part_offset_x_um * sx;
                p.designed_offset_y_um = d.part_offset_y_um * sy;
                p.designed_angle_deg = d.part_angle_deg;
                p.place_pressure_gf = d.place_pressure_gf;
                p.tested_offset_x_um = p.designed_offset_x_um + row.y_x * spec.length_um;
                p.tested_offset_y_um = p.designed_offset_y_um + row.y_y * spec.width_um;
                p.tested_angle_deg = p.designed_angle_deg + row.y_ang;

                out.placements.push_back(std::move(p));
                out.truth.push_back(std::move(row));
                out.expected.push_back(g);
            }
        }
    }
    return out;
}

std::string truth_csv(const GeneratedData& data) {
    std::string out;
    for (std::size_t i = 0; i < domain::kFeatureColumns.size(); ++i) {
        out += domain::kFeatureColumns[i];
        out += ',';
    }
    out += "g_x,g_y,g_ang\n";
    std::vector<std::string> fields;
    for (std::size_t i = 0; i < data.truth.size(); ++i) {
        const auto& r = data.truth[i];
        fields.clear();
        fields.push_back(r.board_id);
        fields.push_back(r.component_id);
        fields.push_back(std::to_string(r.setting_id));
        fields.push_back(r.spec_name);
        for (double v : r.x) fields.push_back(io::format_number(v));
        fields.push_back(io::format_number(r.y_x));
        fields.push_back(io::format_number(r.y_y));
        fields.push_back(io::format_number(r.y_ang));
        for (double v : data.expected[i]) fields.push_back(io::format_number(v));
        out += io::csv_line(fields);
    }
    return out;
}

std::string manifest_json(const GeneratorConfig& config, std::span<const DoeSetting> design,
                          std::span<const domain::ComponentSpec> specs, const GeneratedData& data) {
    using nlohmann::ordered_json;
    ordered_json j;
    j["generator"] = "synthline";
    j["mode"] = std::string(to_string(config.mode));
    j["seed"] = config.seed;
    j["design_seed"] = kDesignSeed;
    j["replications"] = config.replications;
    j["noise_std"] = {{"x_ratio", config.noise_std[0]},
                      {"y_ratio", config.noise_std[1]},
                      {"angle_deg", config.noise_std[2]}};
    j["spi_noise_std"] = {{"offset_um", config.spi_offset_std_um},
                          {"angle_deg", config.spi_angle_std_deg},
                          {"volume_pct", config.spi_volume_std_pct}};
    ordered_json coeffs = ordered_json::array();
    const std::array<const char*, 3> targets{"shift_x_ratio", "shift_y_ratio", "shift_angle_deg"};
    for (std::size_t t = 0; t < 3; ++t) {
        coeffs.push_back({{"target", targets[t]},
                          {"affine", config.coefficients.affine[t]},
                          {"x5_x6", config.coefficients.nonlinear[t][0]},
                          {"x5_x7", config.coefficients.nonlinear[t][1]},
                          {"tanh_4x1", config.coefficients.nonlinear[t][2]}});
    }
    j["coefficients"] = coeffs;
    ordered_json spec_list = ordered_json::array();
    for (const auto& s : specs) {
        spec_list.push_back({{"name", s.name}, {"length_um", s.length_um}, {"width_um", s.width_um}});
    }
    j["specs"] = spec_list;
    ordered_json rows = ordered_json::array();
    for (const auto& d : design) {
        rows.push_back({{"setting_id", d.setting_id},
                        {"synthetic", d.setting_id > 5 && d.setting_id < 33},
                        {"paste_offset_x_um", d.paste_offset_x_um},
                        {"paste_offset_y_um", d.paste_offset_y_um},
                        {"paste_angle_deg", d.paste_angle_deg},
                        {"avg_volume_pct", d.avg_volume_pct},
                        {"diff_volume_pct", d.diff_volume_pct},
                        {"part_offset_x_um", d.part_offset_x_um},
                        {"part_offset_y_um", d.part_offset_y_um},
                        {"part_angle_deg", d.part_angle_deg},
                        {"place_pressure_gf", d.place_pressure_gf}});
    }
    j["design"] = rows;
    j["counts"] = {{"deposits", data.deposits.size()}, {"placements", data.placements.size()}};
    return j.dump(2) + "\n";
}

}  // namespace shiftcast::synthline
