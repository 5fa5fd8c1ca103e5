#pragma once

// Synthetic SPI/AOI line data with the 33-setting x 6-type x replication DOE
// layout, a configurable ground-truth shift function and calibrated noise.

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "shiftcast/domain/types.hpp"

namespace shiftcast::synthline {

/// One DOE row in C0402 micrometres; other sizes scale by length/1000 (X)
/// and width/500 (Y).
struct DoeSetting {
    int setting_id = 0;
    double paste_offset_x_um = 0.0;
    double paste_offset_y_um = 0.0;
    double paste_angle_deg = 0.0;
    double avg_volume_pct = 100.0;
    double diff_volume_pct = 0.0;
    double part_offset_x_um = 0.0;
    double part_offset_y_um = 0.0;
    double part_angle_deg = 0.0;
    double place_pressure_gf = 0.0;

    friend bool operator==(const DoeSetting&, const DoeSetting&) = default;
};

/// Settings 1-5 and 33 are fixed reference C0402 rows; 6-32 are synthetic,
/// drawn by a fixed-seed Latin-hypercube sampler over the reference ranges
/// with the reference discrete levels for angles, volumes and pressure.
std::vector<DoeSetting> builtin_design();

/// Seed of the sampler behind settings 6-32.
inline constexpr std::uint64_t kDesignSeed = 0x0402'5EED'2019'0033ULL;

enum class Mode { Linear, Nonlinear };

std::string_view to_string(Mode mode) noexcept;

/// Per target (x, y, angle):
///   g = a0 + sum_j a_j x_j                                   (linear)
///   g = a0 + sum_j a_j x_j + b1 x5 x6 + b2 x5 x7 + k tanh(4 x1)  (nonlinear)
/// Ratios for x/y, degrees for angle.
struct Coefficients {
    std::array<std::array<double, 10>, 3> affine{};    // a0, a1..a9
    std::array<std::array<double, 3>, 3> nonlinear{};  // b1, b2, kappa

    static Coefficients defaults();
};

std::array<double, 3> ground_truth(Mode mode, const Coefficients& coefficients,
                                   const std::array<double, domain::kFeatureCount>& x);

struct GeneratorConfig {
    Mode mode = Mode::Nonlinear;
    /// Target noise: x and y as ratios, angle in degrees.
    std::array<double, 3> noise_std{0.009, 0.035, 0.5};
    /// SPI perturbation of the paste centre (um, C0402 scale), paste angle
    /// (deg) and paste volumes (percentage points).
    double spi_offset_std_um = 5.0;
    double spi_angle_std_deg = 0.3;
    double spi_volume_std_pct = 3.0;
    std::size_t replications = 20;
    std::uint64_t seed = 0;
    Coefficients coefficients = Coefficients::defaults();

    /// Noise-free variant of this config.
    [[nodiscard]] GeneratorConfig noiseless() const;
    /// Throws Error(InvalidConfig) on negative or non-finite stds or zero replications.
    void validate() const;
};

struct GeneratedData {
    std::vector<domain::PasteDeposit> deposits;
    std::vector<domain::PlacementRecord> placements;
    /// Predictors and observed targets exactly as the generator drew them.
    std::vector<domain::FeatureRow> truth;
    /// Noise-free ground truth per row of `truth`.
    std::vector<std::array<double, 3>> expected;
};

GeneratedData generate(const GeneratorConfig& config, std::span<const DoeSetting> design,
                       std::span<const domain::ComponentSpec> specs);

/// Feature CSV plus g_x, g_y, g_ang columns.
std::string truth_csv(const GeneratedData& data);
/// JSON record of config, seeds, design and calibration constants.
std::string manifest_json(const GeneratorConfig& config, std::span<const DoeSetting> design,
                          std::span<const domain::ComponentSpec> specs, const GeneratedData& data);

}  // namespace shiftcast::synthline
