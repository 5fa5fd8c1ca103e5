#pragma once

// Model selection: seeded k-fold plans, MAE/RMSE, cross-validation, grid
// search, the k-sweep and a per-(model, target) evaluation report.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "shiftcast/domain/types.hpp"
#include "shiftcast/matrix.hpp"
#include "shiftcast/svr/svr.hpp"

namespace shiftcast::modelsel {

/// Balanced fold assignment. Depends only on (n, k, seed).
struct FoldPlan {
    std::size_t n = 0;
    std::size_t k = 0;
    std::uint64_t seed = 0;
    std::vector<std::size_t> assignment;  // fold index of every row

    [[nodiscard]] std::vector<std::size_t> test_indices(std::size_t fold) const;
    [[nodiscard]] std::vector<std::size_t> train_indices(std::size_t fold) const;
    [[nodiscard]] std::vector<std::size_t> fold_sizes() const;
};

/// Throws Error(KTooSmall) for k < 2 and Error(KTooLarge) for k > n.
FoldPlan kfold_split(std::size_t n, std::size_t k, std::uint64_t seed);

/// Throw Error(LengthMismatch) or Error(Empty).
double mae(std::span<const double> actual, std::span<const double> predicted);
double rmse(std::span<const double> actual, std::span<const double> predicted);

/// Per-column z-score. Zero-variance columns are centred but not scaled.
struct Standardizer {
    std::vector<double> mean;
    std::vector<double> scale;

    static Standardizer fit(const Matrix& xs);
    [[nodiscard]] Matrix apply(const Matrix& xs) const;
};

/// Features and one target as dense arrays.
struct Dataset {
    Matrix xs;
    std::vector<double> ys;
};
Dataset make_dataset(std::span<const domain::FeatureRow> rows, domain::Target target);

/// Called once per fold before fitting; `scaler` is null unless standardizing.
using FoldObserver = std::function<void(std::size_t fold, std::span<const std::size_t> train,
                                        std::span<const std::size_t> test,
                                        const Standardizer* scaler)>;

struct CvOptions {
    bool standardize = false;
    FoldObserver observer{};
    /// Worker threads for fold evaluation; 0 picks the hardware concurrency.
    unsigned threads = 1;
};

struct CvResult {
    double mean_mae = 0.0;
    double mean_rmse = 0.0;
    std::vector<double> fold_mae;
    std::vector<double> fold_rmse;
    /// Folds whose solver hit max_epochs; their metrics are still included.
    std::size_t not_converged = 0;
};

CvResult cross_validate(const svr::TrainConfig& config, const Dataset& data, const FoldPlan& plan,
                        const CvOptions& options = {});
CvResult cross_validate(const svr::TrainConfig& config, std::span<const domain::FeatureRow> rows,
                        domain::Target target, std::size_t k, std::uint64_t seed,
                        bool standardize = false);

struct Grid {
    std::vector<double> cs;
    std::vector<double> epsilons;
    std::vector<double> gammas;  // unused for the linear kernel
    svr::KernelVariant kernel = svr::KernelVariant::Rbf;

    /// Throws Error(InvalidConfig) on empty lists or out-of-range values.
    void validate() const;
    /// Every combination, C outermost, then epsilon, then gamma.
    [[nodiscard]] std::vector<svr::TrainConfig> configs(const svr::TrainConfig& base) const;

    static Grid defaults(svr::KernelVariant kernel);
};

struct GridRow {
    svr::TrainConfig config;
    CvResult cv;
};

struct GridResult {
    std::size_t best_index = 0;
    std::vector<GridRow> table;

    [[nodiscard]] const svr::TrainConfig& best() const { return table.at(best_index).config; }
};

/// Every grid point is scored on the same fold plan. The winner has the
/// lowest mean RMSE; ties go to smaller C, then larger epsilon, then smaller
/// gamma. The table is identical for any thread count.
GridResult grid_search(const Grid& grid, const svr::TrainConfig& base, const Dataset& data,
                       std::size_t k, std::uint64_t seed, unsigned threads = 0);

struct KPoint {
    std::size_t k = 0;
    double mean_mae = 0.0;
    double mean_rmse = 0.0;
};

/// One cross-validation per k, each with its own plan kfold_split(n, k, seed).
std::vector<KPoint> k_sweep(const svr::TrainConfig& config, const Dataset& data,
                            std::span<const std::size_t> ks, std::uint64_t seed,
                            unsigned threads = 0);

struct NamedConfig {
    std::string name;
    svr::TrainConfig config;
};

struct EvalRow {
    std::string model;
    domain::Target target = domain::Target::ShiftX;
    double mae = 0.0;
    double rmse = 0.0;
    std::size_t k = 0;
    svr::TrainConfig config;
    std::size_t not_converged = 0;
};

struct EvalReport {
    std::vector<EvalRow> rows;

    /// model,target,mae,rmse,k,c,epsilon,gamma
    [[nodiscard]] std::string csv() const;
    /// Column-aligned text table in row order.
    [[nodiscard]] std::string text_table() const;
};

/// Rows ordered by model, then target in the given order.
EvalReport evaluate_models(std::span<const domain::FeatureRow> rows,
                           std::span<const NamedConfig> configs,
                           std::span<const domain::Target> targets, std::size_t k,
                           std::uint64_t seed, unsigned threads = 0);

/// Runs task(i) for i in [0, count) on up to `threads` workers (0 = hardware
/// concurrency). Results must be written to per-index slots.
void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& task);

}  // namespace shiftcast::modelsel
