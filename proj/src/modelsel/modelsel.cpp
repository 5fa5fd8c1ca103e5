#include "shiftcast/modelsel/modelsel.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <iomanip>
#include <mutex>
#include <numeric>
#include <optional>
#include <random>
#include <sstream>
#include <thread>
#include <tuple>

#include "shiftcast/error.hpp"
#include "shiftcast/io/csv.hpp"

namespace shiftcast::modelsel {
namespace {

std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

void check_lengths(std::span<const double> actual, std::span<const double> predicted) {
    if (actual.size() != predicted.size()) {
        throw Error(ErrorKind::LengthMismatch, std::to_string(actual.size()) + " actual vs " +
                                                   std::to_string(predicted.size()) + " predicted");
    }
    if (actual.empty()) {
        throw Error(ErrorKind::Empty, "no values to score");
    }
}

double mean_of(const std::vector<double>& v) {
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

void require_finite_list(const std::vector<double>& values, const char* name, bool allow_zero) {
    if (values.empty()) {
        throw Error(ErrorKind::InvalidConfig, std::string("grid list '") + name + "' is empty");
    }
    for (double v : values) {
        if (!std::isfinite(v) || v < 0.0 || (!allow_zero && v == 0.0)) {
            throw Error(ErrorKind::InvalidConfig,
                        std::string("grid list '") + name + "' has invalid value " +
                            io::format_number(v));
        }
    }
}

}  // namespace

std::vector<std::size_t> FoldPlan::test_indices(std::size_t fold) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < n; ++i) {
        if (assignment[i] == fold) out.push_back(i);
    }
    return out;
}

std::vector<std::size_t> FoldPlan::train_indices(std::size_t fold) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < n; ++i) {
        if (assignment[i] != fold) out.push_back(i);
    }
    return out;
}

std::vector<std::size_t> FoldPlan::fold_sizes() const {
    std::vector<std::size_t> sizes(k, 0);
    for (std::size_t f : assignment) ++sizes[f];
    return sizes;
}

FoldPlan kfold_split(std::size_t n, std::size_t k, std::uint64_t seed) {
    if (k < 2) {
        throw Error(ErrorKind::KTooSmall, "k = " + std::to_string(k) + " (need k >= 2)");
    }
    if (k > n) {
        throw Error(ErrorKind::KTooLarge,
                    "k = " + std::to_string(k) + " exceeds n = " + std::to_string(n));
    }
    // The stream depends on k so that sweeps over k see independent plans.
    std::mt19937_64 rng(splitmix64(splitmix64(seed) ^ splitmix64(k)));
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::shuffle(order.begin(), order.end(), rng);

    FoldPlan plan{n, k, seed, std::vector<std::size_t>(n)};
    for (std::size_t pos = 0; pos < n; ++pos) {
        plan.assignment[order[pos]] = pos % k;
    }
    return plan;
}

double mae(std::span<const double> actual, std::span<const double> predicted) {
    check_lengths(actual, predicted);
    double sum = 0.0;
    for (std::size_t i = 0; i < actual.size(); ++i) {
        sum += std::abs(actual[i] - predicted[i]);
    }
    return sum / static_cast<double>(actual.size());
}

double rmse(std::span<const double> actual, std::span<const double> predicted) {
    check_lengths(actual, predicted);
    double sum = 0.0;
    for (std::size_t i = 0; i < actual.size(); ++i) {
        const double r = actual[i] - predicted[i];
        sum += r * r;
    }
    return std::sqrt(sum / static_cast<double>(actual.size()));
}

Standardizer Standardizer::fit(const Matrix& xs) {
    if (xs.empty()) {
        throw Error(ErrorKind::Empty, "cannot fit a standardizer on zero rows");
    }
    const std::size_t d = xs.cols();
    const auto n = static_cast<double>(xs.rows());
    Standardizer s{std::vector<double>(d, 0.0), std::vector<double>(d, 1.0)};
    for (std::size_t c = 0; c < d; ++c) {
        double sum = 0.0;
        for (std::size_t r = 0; r < xs.rows(); ++r) sum += xs(r, c);
        const double mean = sum / n;
        double ss = 0.0;
        for (std::size_t r = 0; r < xs.rows(); ++r) ss += (xs(r, c) - mean) * (xs(r, c) - mean);
        const double sd = std::sqrt(ss / n);
        s.mean[c] = mean;
        s.scale[c] = sd > 0.0 ? sd : 1.0;
    }
    return s;
}

Matrix Standardizer::apply(const Matrix& xs) const {
    if (xs.cols() != mean.size()) {
        throw Error(ErrorKind::DimensionMismatch, "standardizer fitted on " +
                                                      std::to_string(mean.size()) + " columns, got " +
                                                      std::to_string(xs.cols()));
    }
    Matrix out = xs;
    for (std::size_t r = 0; r < out.rows(); ++r) {
        for (std::size_t c = 0; c < out.cols(); ++c) {
            out(r, c) = (out(r, c) - mean[c]) / scale[c];
        }
    }
    return out;
}

Dataset make_dataset(std::span<const domain::FeatureRow> rows, domain::Target target) {
    Dataset data{Matrix(rows.size(), domain::kFeatureCount), std::vector<double>(rows.size())};
    for (std::size_t i = 0; i < rows.size(); ++i) {
        std::copy(rows[i].x.begin(), rows[i].x.end(), data.xs.row(i).begin());
        data.ys[i] = rows[i].target(target);
    }
    return data;
}

void parallel_for(std::size_t count, unsigned threads,
                  const std::function<void(std::size_t)>& task) {
    if (threads == 0) {
        threads = std::max(1u, std::thread::hardware_concurrency());
    }
    const auto workers = static_cast<std::size_t>(std::min<std::size_t>(threads, count));
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) task(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::size_t failed_index = count;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < count; i = next++) {
                try {
                    task(i);
                } catch (...) {
                    // Keep the lowest failing index so the reported error is schedule-independent.
                    const std::lock_guard lock(failure_mutex);
                    if (i < failed_index) {
                        failed_index = i;
                        failure = std::current_exception();
                    }
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
}

CvResult cross_validate(const svr::TrainConfig& config, const Dataset& data, const FoldPlan& plan,
                        const CvOptions& options) {
    config.validate();
    if (plan.n != data.xs.rows() || plan.n != data.ys.size()) {
        throw Error(ErrorKind::LengthMismatch, "fold plan covers " + std::to_string(plan.n) +
                                                   " rows, dataset has " +
                                                   std::to_string(data.xs.rows()));
    }
    struct FoldOutcome {
        double mae = 0.0;
        double rmse = 0.0;
        bool converged = true;
    };
    std::vector<FoldOutcome> outcomes(plan.k);
    std::vector<std::vector<std::size_t>> trains(plan.k), tests(plan.k);
    std::vector<std::optional<Standardizer>> scalers(plan.k);
    for (std::size_t f = 0; f < plan.k; ++f) {
        trains[f] = plan.train_indices(f);
        tests[f] = plan.test_indices(f);
        if (options.standardize) {
            scalers[f] = Standardizer::fit(data.xs.select_rows(trains[f]));
        }
        if (options.observer) {
            options.observer(f, trains[f], tests[f], scalers[f] ? &*scalers[f] : nullptr);
        }
    }

    parallel_for(plan.k, options.threads, [&](std::size_t f) {
        Matrix train_x = data.xs.select_rows(trains[f]);
        Matrix test_x = data.xs.select_rows(tests[f]);
        if (scalers[f]) {
            train_x = scalers[f]->apply(train_x);
            test_x = scalers[f]->apply(test_x);
        }
        std::vector<double> train_y, test_y;
        train_y.reserve(trains[f].size());
        test_y.reserve(tests[f].size());
        for (std::size_t i : trains[f]) train_y.push_back(data.ys[i]);
        for (std::size_t i : tests[f]) test_y.push_back(data.ys[i]);

        const auto fit = svr::train(config, train_x, train_y);
        const auto predicted = fit.model.predict(test_x);
        outcomes[f] = {mae(test_y, predicted), rmse(test_y, predicted), fit.stats.converged};
    });

    CvResult result;
    for (const auto& o : outcomes) {
        result.fold_mae.push_back(o.mae);
        result.fold_rmse.push_back(o.rmse);
        if (!o.converged) ++result.not_converged;
    }
    result.mean_mae = mean_of(result.fold_mae);
    result.mean_rmse = mean_of(result.fold_rmse);
    return result;
}

CvResult cross_validate(const svr::TrainConfig& config, std::span<const domain::FeatureRow> rows,
                        domain::Target target, std::size_t k, std::uint64_t seed,
                        bool standardize) {
    const Dataset data = make_dataset(rows, target);
    const FoldPlan plan = kfold_split(rows.size(), k, seed);
    CvOptions options;
    options.standardize = standardize;
    return cross_validate(config, data, plan, options);
}

void Grid::validate() const {
    require_finite_list(cs, "c", false);
    require_finite_list(epsilons, "epsilon", true);
    if (kernel == svr::KernelVariant::Rbf) {
        require_finite_list(gammas, "gamma", false);
    }
}

std::vector<svr::TrainConfig> Grid::configs(const svr::TrainConfig& base) const {
    validate();
    std::vector<svr::TrainConfig> out;
    const std::vector<double> no_gamma{0.0};
    const auto& gs = kernel == svr::KernelVariant::Rbf ? gammas : no_gamma;
    for (double c : cs) {
        for (double eps : epsilons) {
            for (double g : gs) {
                svr::TrainConfig cfg = base;
                cfg.c = c;
                cfg.epsilon = eps;
                cfg.kernel = kernel == svr::KernelVariant::Rbf ? svr::KernelSpec::rbf(g)
                                                               : svr::KernelSpec::linear();
                out.push_back(cfg);
            }
        }
    }
    return out;
}

Grid Grid::defaults(svr::KernelVariant kernel) {
    return Grid{{0.01, 0.13, 0.1, 1.0, 10.0, 100.0},
                {0.00097, 0.001, 0.01, 0.031, 0.1},
                {0.01, 0.1, 1.0, 10.0},
                kernel};
}

GridResult grid_search(const Grid& grid, const svr::TrainConfig& base, const Dataset& data,
                       std::size_t k, std::uint64_t seed, unsigned threads) {
    const auto configs = grid.configs(base);
    const FoldPlan plan = kfold_split(data.xs.rows(), k, seed);

    GridResult result;
    result.table.resize(configs.size());
    parallel_for(configs.size(), threads, [&](std::size_t i) {
        result.table[i] = {configs[i], cross_validate(configs[i], data, plan)};
    });

    const auto key = [](const GridRow& r) {
        return std::make_tuple(r.cv.mean_rmse, r.config.c, -r.config.epsilon,
                               r.config.kernel.gamma());
    };
    for (std::size_t i = 1; i < result.table.size(); ++i) {
        if (key(result.table[i]) < key(result.table[result.best_index])) {
            result.best_index = i;
        }
    }
    return result;
}

std::vector<KPoint> k_sweep(const svr::TrainConfig& config, const Dataset& data,
                            std::span<const std::size_t> ks, std::uint64_t seed,
                            unsigned threads) {
    std::vector<FoldPlan> plans;
    plans.reserve(ks.size());
    for (std::size_t k : ks) {
        plans.push_back(kfold_split(data.xs.rows(), k, seed));
    }
    std::vector<KPoint> out(ks.size());
    parallel_for(ks.size(), threads, [&](std::size_t i) {
        const CvResult cv = cross_validate(config, data, plans[i]);
        out[i] = {ks[i], cv.mean_mae, cv.mean_rmse};
    });
    return out;
}

EvalReport evaluate_models(std::span<const domain::FeatureRow> rows,
                           std::span<const NamedConfig> configs,
                           std::span<const domain::Target> targets, std::size_t k,
                           std::uint64_t seed, unsigned threads) {
    const FoldPlan plan = kfold_split(rows.size(), k, seed);
    std::vector<Dataset> datasets;
    for (domain::Target t : targets) {
        datasets.push_back(make_dataset(rows, t));
    }
    EvalReport report;
    report.rows.resize(configs.size() * targets.size());
    parallel_for(report.rows.size(), threads, [&](std::size_t i) {
        const NamedConfig& named = configs[i / targets.size()];
        const std::size_t t = i % targets.size();
        const CvResult cv = cross_validate(named.config, datasets[t], plan);
        report.rows[i] = {named.name, targets[t], cv.mean_mae, cv.mean_rmse, k, named.config,
                          cv.not_converged};
    });
    return report;
}

std::string EvalReport::csv() const {
    std::string out = "model,target,mae,rmse,k,c,epsilon,gamma\n";
    for (const auto& r : rows) {
        const std::array<std::string, 8> fields{r.model,
                                                std::string(domain::target_name(r.target)),
                                                io::format_number(r.mae),
                                                io::format_number(r.rmse),
                                                std::to_string(r.k),
                                                io::format_number(r.config.c),
                                                io::format_number(r.config.epsilon),
                                                io::format_number(r.config.kernel.gamma())};
        out += io::csv_line(fields);
    }
    return out;
}

std::string EvalReport::text_table() const {
    std::vector<std::array<std::string, 4>> cells;
    cells.push_back({"model", "target", "MAE", "RMSE"});
    for (const auto& r : rows) {
        std::ostringstream mae_text, rmse_text;
        mae_text << std::fixed << std::setprecision(6) << r.mae;
        rmse_text << std::fixed << std::setprecision(6) << r.rmse;
        cells.push_back({r.model, std::string(domain::target_name(r.target)), mae_text.str(),
                         rmse_text.str()});
    }
    std::array<std::size_t, 4> width{};
    for (const auto& row : cells) {
        for (std::size_t c = 0; c < 4; ++c) width[c] = std::max(width[c], row[c].size());
    }
    std::ostringstream out;
    for (const auto& row : cells) {
        for (std::size_t c = 0; c < 4; ++c) {
            if (c < 2) {
                out << std::left << std::setw(static_cast<int>(width[c])) << row[c];
            } else {
                out << std::right << std::setw(static_cast<int>(width[c])) << row[c];
            }
            out << (c + 1 < 4 ? "  " : "\n");
        }
    }
    return out.str();
}

}  // namespace shiftcast::modelsel
