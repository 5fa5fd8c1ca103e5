#pragma once

// Epsilon-support-vector regression.
//
// Training solves the dual of the epsilon-insensitive primal in the
// difference variables beta_i = alpha_i - alpha_i^*:
//
//   maximize  -1/2 sum_ij beta_i beta_j k(x_i, x_j) - eps sum_i |beta_i| + sum_i y_i beta_i
//   s.t.      sum_i beta_i = 0,  -C <= beta_i <= C
//
// with SMO-style pairwise updates. The regression function is
// f(x) = sum_i beta_i k(x_i, x) + b.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "shiftcast/matrix.hpp"

namespace shiftcast::svr {

enum class KernelVariant { Linear, Rbf };

class KernelSpec {
public:
    KernelSpec() = default;

    static KernelSpec linear() noexcept { return KernelSpec{}; }
    /// Throws Error(InvalidConfig) unless gamma is finite and positive.
    static KernelSpec rbf(double gamma);

    [[nodiscard]] KernelVariant variant() const noexcept { return variant_; }
    /// Zero for the linear kernel.
    [[nodiscard]] double gamma() const noexcept { return gamma_; }

    friend bool operator==(const KernelSpec&, const KernelSpec&) = default;

private:
    KernelSpec(KernelVariant variant, double gamma) : variant_(variant), gamma_(gamma) {}

    KernelVariant variant_ = KernelVariant::Linear;
    double gamma_ = 0.0;
};

struct TrainConfig {
    double c = 1.0;
    double epsilon = 0.1;
    KernelSpec kernel{};
    double kkt_tolerance = 1e-3;
    std::size_t max_epochs = 1000;
    // The SMO solver is deterministic; the seed is carried for run provenance
    // and used by the reference solver for its starting point.
    std::uint64_t seed = 0;

    /// Throws Error(InvalidConfig) on c <= 0, epsilon < 0, kkt_tolerance <= 0,
    /// max_epochs == 0 or any non-finite value.
    void validate() const;
};

class SvrModel {
public:
    SvrModel() = default;
    SvrModel(KernelSpec kernel, std::size_t dimension, Matrix support_vectors,
             std::vector<double> betas, double bias);

    [[nodiscard]] const KernelSpec& kernel() const noexcept { return kernel_; }
    [[nodiscard]] std::size_t dimension() const noexcept { return dimension_; }
    [[nodiscard]] const Matrix& support_vectors() const noexcept { return support_vectors_; }
    [[nodiscard]] std::span<const double> betas() const noexcept { return betas_; }
    [[nodiscard]] double bias() const noexcept { return bias_; }

    [[nodiscard]] double predict(std::span<const double> x) const;
    [[nodiscard]] std::vector<double> predict(const Matrix& xs) const;

private:
    KernelSpec kernel_{};
    std::size_t dimension_ = 0;
    Matrix support_vectors_{};
    std::vector<double> sv_columns_{};
    std::vector<double> betas_{};
    double bias_ = 0.0;
};

struct SolveStats {
    std::size_t epochs_run = 0;
    std::size_t steps = 0;
    double dual_objective = 0.0;
    std::size_t kkt_violations_remaining = 0;
    /// Largest pairwise KKT violation at exit.
    double kkt_gap = 0.0;
    bool converged = false;
    /// Dual objective at the end of every epoch, then once more at exit.
    std::vector<double> objective_trace{};
    /// Unpruned dual solution, one entry per training row.
    std::vector<double> betas{};
};

struct TrainResult {
    SvrModel model;
    SolveStats stats;
};

/// Linear: <u, v>. Rbf: exp(-gamma * ||u - v||^2).
double kernel_eval(const KernelSpec& kernel, std::span<const double> u, std::span<const double> v);

/// Never throws on non-convergence; check stats.converged.
TrainResult train(const TrainConfig& config, const Matrix& xs, std::span<const double> ys);

inline double predict(const SvrModel& model, std::span<const double> x) { return model.predict(x); }

/// Dual objective at `betas`; throws Error(InfeasiblePoint) when the box or
/// equality constraint is violated by more than config.kkt_tolerance.
double dual_objective(const TrainConfig& config, const Matrix& xs, std::span<const double> ys,
                      std::span<const double> betas);

/// Rows at or below this count get a fully cached kernel matrix.
inline constexpr std::size_t kKernelCacheLimit = 4096;

}  // namespace shiftcast::svr
