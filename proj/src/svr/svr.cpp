#include "shiftcast/svr/svr.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>

#include "kernel_matrix.hpp"
#include "shiftcast/error.hpp"
#include "shiftcast/simd/kernels.hpp"

namespace shiftcast::svr {

KernelSpec KernelSpec::rbf(double gamma) {
    if (!std::isfinite(gamma) || gamma <= 0.0) {
        throw Error(ErrorKind::InvalidConfig, "rbf gamma must be finite and > 0, got " +
                                                  std::to_string(gamma));
    }
    return KernelSpec{KernelVariant::Rbf, gamma};
}

void TrainConfig::validate() const {
    if (!std::isfinite(c) || c <= 0.0) {
        throw Error(ErrorKind::InvalidConfig, "C must be finite and > 0");
    }
    if (!std::isfinite(epsilon) || epsilon < 0.0) {
        throw Error(ErrorKind::InvalidConfig, "epsilon must be finite and >= 0");
    }
    if (!std::isfinite(kkt_tolerance) || kkt_tolerance <= 0.0) {
        throw Error(ErrorKind::InvalidConfig, "kkt_tolerance must be finite and > 0");
    }
    if (max_epochs == 0) {
        throw Error(ErrorKind::InvalidConfig, "max_epochs must be positive");
    }
    if (kernel.variant() == KernelVariant::Rbf && !(kernel.gamma() > 0.0)) {
        throw Error(ErrorKind::InvalidConfig, "rbf gamma must be > 0");
    }
}

double kernel_eval(const KernelSpec& kernel, std::span<const double> u, std::span<const double> v) {
    if (u.size() != v.size()) {
        throw Error(ErrorKind::DimensionMismatch, "kernel operands have dimensions " +
                                                      std::to_string(u.size()) + " and " +
                                                      std::to_string(v.size()));
    }
    if (kernel.variant() == KernelVariant::Linear) {
        return simd::dot(u, v);
    }
    return std::exp(-kernel.gamma() * simd::squared_distance(u, v));
}

// ---------------------------------------------------------------------------
// SvrModel

SvrModel::SvrModel(KernelSpec kernel, std::size_t dimension, Matrix support_vectors,
                   std::vector<double> betas, double bias)
    : kernel_(kernel), dimension_(dimension), support_vectors_(std::move(support_vectors)),
      betas_(std::move(betas)), bias_(bias) {
    if (dimension_ == 0) {
        throw Error(ErrorKind::DimensionMismatch, "model dimension must be positive");
    }
    if (support_vectors_.rows() != betas_.size()) {
        throw Error(ErrorKind::DimensionMismatch, "support vector and beta counts differ");
    }
    if (!support_vectors_.empty() && support_vectors_.cols() != dimension_) {
        throw Error(ErrorKind::DimensionMismatch, "support vectors do not match model dimension");
    }
    sv_columns_ = support_vectors_.column_major();
}

double SvrModel::predict(std::span<const double> x) const {
    if (x.size() != dimension_) {
        throw Error(ErrorKind::DimensionMismatch,
                    "expected " + std::to_string(dimension_) + " features, got " +
                        std::to_string(x.size()));
    }
    if (betas_.empty()) {
        return bias_;
    }
    std::vector<double> k(betas_.size());
    const detail::KernelRows rows(kernel_, sv_columns_, betas_.size(), dimension_);
    rows.compute(x, k);
    return simd::weighted_sum(betas_, k) + bias_;
}

std::vector<double> SvrModel::predict(const Matrix& xs) const {
    std::vector<double> out(xs.rows(), bias_);
    if (xs.rows() == 0) {
        return out;
    }
    if (xs.cols() != dimension_) {
        throw Error(ErrorKind::DimensionMismatch,
                    "expected " + std::to_string(dimension_) + " features, got " +
                        std::to_string(xs.cols()));
    }
    if (betas_.empty()) {
        return out;
    }
    const detail::KernelRows rows(kernel_, sv_columns_, betas_.size(), dimension_);
    std::vector<double> k(betas_.size());
    for (std::size_t r = 0; r < xs.rows(); ++r) {
        rows.compute(xs.row(r), k);
        out[r] = simd::weighted_sum(betas_, k) + bias_;
    }
    return out;
}

// ---------------------------------------------------------------------------
// SMO solver

namespace {

void validate_training_set(const Matrix& xs, std::span<const double> ys) {
    if (xs.rows() == 0 || ys.empty()) {
        throw Error(ErrorKind::EmptyTrainingSet, "no training rows");
    }
    if (xs.rows() != ys.size()) {
        throw Error(ErrorKind::DimensionMismatch, std::to_string(xs.rows()) + " rows but " +
                                                      std::to_string(ys.size()) + " targets");
    }
    if (xs.cols() == 0) {
        throw Error(ErrorKind::DimensionMismatch, "feature vectors are empty");
    }
    for (double v : xs.data()) {
        if (!std::isfinite(v)) {
            throw Error(ErrorKind::NonFiniteInput, "non-finite feature value");
        }
    }
    for (double v : ys) {
        if (!std::isfinite(v)) {
            throw Error(ErrorKind::NonFiniteInput, "non-finite target value");
        }
    }
}

// Derivative of the dual when beta_i moves up (right) or down (left).
inline double up_derivative(double beta, double f, double eps) {
    return beta >= 0.0 ? f - eps : f + eps;
}
inline double down_derivative(double beta, double f, double eps) {
    return beta > 0.0 ? f - eps : f + eps;
}

struct PairMove {
    double beta_i;
    double beta_j;
    double gain;
};

struct PairInputs {
    double beta_i, beta_j;
    double f_i, f_j;
    double k_ii, k_jj, k_ij;
    double c, eps;
};

// |b + t| - |b| without cancellation when the sign does not change.
double abs_delta(double b, double t) {
    const double moved = b + t;
    if (b >= 0.0 && moved >= 0.0) {
        return t;
    }
    if (b <= 0.0 && moved <= 0.0) {
        return -t;
    }
    return std::abs(moved) - std::abs(b);
}

// Dual increase for beta_i += t, beta_j -= t.
double move_gain(const PairInputs& p, double eta, double t) {
    return t * (p.f_i - p.f_j) - 0.5 * eta * t * t -
           p.eps * (abs_delta(p.beta_i, t) + abs_delta(p.beta_j, -t));
}

// Exact maximization of the dual along beta_i += t, beta_j -= t, t >= 0.
// The objective is a concave piecewise quadratic with kinks where either
// variable crosses zero; every kink, box end and per-segment stationary point
// is a candidate. Kinks and box ends are assigned exactly so bounded and
// zero coefficients stay exact.
PairMove solve_pair(const PairInputs& p) {
    const double hi_i = p.c - p.beta_i;
    const double hi_j = p.beta_j + p.c;
    const double hi = std::max(0.0, std::min(hi_i, hi_j));
    const double eta = std::max(0.0, p.k_ii + p.k_jj - 2.0 * p.k_ij);

    struct Candidate {
        double t;
        double ni;
        double nj;
    };
    std::array<Candidate, 10> candidates{};
    std::size_t count = 0;
    auto push = [&](double t, double ni, double nj) {
        candidates[count++] = {t, std::clamp(ni, -p.c, p.c), std::clamp(nj, -p.c, p.c)};
    };

    std::array<double, 4> breaks{};
    std::size_t nbreaks = 0;
    breaks[nbreaks++] = 0.0;
    if (-p.beta_i > 0.0 && -p.beta_i < hi) {
        breaks[nbreaks++] = -p.beta_i;
        push(-p.beta_i, 0.0, p.beta_j + p.beta_i);
    }
    if (p.beta_j > 0.0 && p.beta_j < hi) {
        breaks[nbreaks++] = p.beta_j;
        push(p.beta_j, p.beta_i + p.beta_j, 0.0);
    }
    breaks[nbreaks++] = hi;
    std::sort(breaks.begin(), breaks.begin() + static_cast<std::ptrdiff_t>(nbreaks));

    if (hi > 0.0) {
        if (hi_i <= hi_j) {
            push(hi, p.c, hi_i == hi_j ? -p.c : p.beta_j - hi);
        } else {
            push(hi, p.beta_i + hi, -p.c);
        }
    }

    if (eta > 0.0) {
        for (std::size_t s = 0; s + 1 < nbreaks; ++s) {
            const double a = breaks[s];
            const double b = breaks[s + 1];
            if (!(b > a)) {
                continue;
            }
            const double mid = 0.5 * (a + b);
            const double si = (p.beta_i + mid) > 0.0 ? 1.0 : -1.0;
            const double sj = (p.beta_j - mid) > 0.0 ? 1.0 : -1.0;
            const double slope = (p.f_i - p.f_j) - p.eps * (si - sj);
            const double t = std::clamp(slope / eta, a, b);
            if (t > a && t < b) {
                push(t, p.beta_i + t, p.beta_j - t);
            }
        }
    }

    std::sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(count),
              [](const Candidate& x, const Candidate& y) { return x.t < y.t; });
    PairMove best{p.beta_i, p.beta_j, -std::numeric_limits<double>::infinity()};
    for (std::size_t k = 0; k < count; ++k) {
        const double gain = move_gain(p, eta, candidates[k].t);
        if (gain > best.gain) {
            best = {candidates[k].ni, candidates[k].nj, gain};
        }
    }
    return best;
}

constexpr double kMinCurvature = 1e-12;

struct Selection {
    std::size_t up = 0;
    std::size_t down = 0;
    double max_up = -std::numeric_limits<double>::infinity();
    double min_down = std::numeric_limits<double>::infinity();

    [[nodiscard]] double gap() const noexcept { return max_up - min_down; }
};

Selection select_pair(std::span<const double> beta, std::span<const double> f, double c,
                      double eps) {
    Selection s;
    for (std::size_t k = 0; k < beta.size(); ++k) {
        if (beta[k] < c) {
            const double d = up_derivative(beta[k], f[k], eps);
            if (d > s.max_up) {
                s.max_up = d;
                s.up = k;
            }
        }
        if (beta[k] > -c) {
            const double d = down_derivative(beta[k], f[k], eps);
            if (d < s.min_down) {
                s.min_down = d;
                s.down = k;
            }
        }
    }
    return s;
}

std::size_t count_violations(std::span<const double> beta, std::span<const double> f, double c,
                             double eps, const Selection& s, double tol) {
    std::size_t count = 0;
    for (std::size_t k = 0; k < beta.size(); ++k) {
        const bool up_bad = beta[k] < c && up_derivative(beta[k], f[k], eps) > s.min_down + tol;
        const bool down_bad =
            beta[k] > -c && down_derivative(beta[k], f[k], eps) < s.max_up - tol;
        if (up_bad || down_bad) {
            ++count;
        }
    }
    return count;
}

// With F = y - K beta, beta'K beta = beta'(y - F).
double objective_from_gradient(std::span<const double> beta, std::span<const double> y,
                               std::span<const double> f, double eps) {
    double value = 0.0;
    for (std::size_t k = 0; k < beta.size(); ++k) {
        value += 0.5 * beta[k] * (y[k] + f[k]) - eps * std::abs(beta[k]);
    }
    return value;
}

double compute_bias(std::span<const double> beta, std::span<const double> f, double c,
                    double eps) {
    double sum = 0.0;
    std::size_t free_count = 0;
    double lower = -std::numeric_limits<double>::infinity();
    double upper = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < beta.size(); ++k) {
        const double b = beta[k];
        if (b != 0.0 && std::abs(b) < c) {
            sum += f[k] - (b > 0.0 ? eps : -eps);
            ++free_count;
        } else if (b == 0.0) {
            lower = std::max(lower, f[k] - eps);
            upper = std::min(upper, f[k] + eps);
        } else if (b > 0.0) {
            upper = std::min(upper, f[k] - eps);
        } else {
            lower = std::max(lower, f[k] + eps);
        }
    }
    if (free_count > 0) {
        return sum / static_cast<double>(free_count);
    }
    if (std::isfinite(lower) && std::isfinite(upper)) {
        return 0.5 * (lower + upper);
    }
    return std::isfinite(lower) ? lower : (std::isfinite(upper) ? upper : 0.0);
}

class SmoSolver {
public:
    SmoSolver(const TrainConfig& config, const Matrix& xs, std::span<const double> ys)
        : config_(config), ys_(ys), gram_(config.kernel, xs), beta_(xs.rows(), 0.0),
          f_(ys.begin(), ys.end()) {}

    SolveStats run() {
        const std::size_t n = beta_.size();
        const std::size_t max_steps = config_.max_epochs * n;
        SolveStats stats;
        std::size_t next_epoch_at = n;
        Selection sel = select_pair(beta_, f_, config_.c, config_.epsilon);
        while (sel.gap() > config_.kkt_tolerance && stats.steps < max_steps) {
            bool progressed = apply_pair(sel.up, partner(sel));
            if (!progressed) {
                progressed = full_pass(stats, max_steps);
            }
            if (!progressed) {
                break;
            }
            ++stats.steps;
            if (stats.steps >= next_epoch_at) {
                ++stats.epochs_run;
                stats.objective_trace.push_back(objective());
                next_epoch_at = stats.steps + n;
            }
            sel = select_pair(beta_, f_, config_.c, config_.epsilon);
        }
        if (stats.steps + n != next_epoch_at || stats.steps == 0) {
            ++stats.epochs_run;
        }
        stats.converged = sel.gap() <= config_.kkt_tolerance;
        stats.kkt_gap = std::max(0.0, sel.gap());
        stats.kkt_violations_remaining =
            count_violations(beta_, f_, config_.c, config_.epsilon, sel, config_.kkt_tolerance);
        stats.dual_objective = objective();
        stats.objective_trace.push_back(stats.dual_objective);
        stats.betas = beta_;
        return stats;
    }

    [[nodiscard]] double bias() const {
        return compute_bias(beta_, f_, config_.c, config_.epsilon);
    }

private:
    double objective() const { return objective_from_gradient(beta_, ys_, f_, config_.epsilon); }

    // Second index for the maximal up-violator: among the indices that form a
    // violating pair with it, the one with the largest second-order gain
    // estimate slope^2 / curvature. Ties go to the lowest index.
    std::size_t partner(const Selection& sel) {
        const std::size_t i = sel.up;
        const auto row_i = gram_.row(i, buffer_i_);
        const double k_ii = gram_.diagonal(i);
        std::size_t best = sel.down;
        double best_score = -1.0;
        for (std::size_t k = 0; k < beta_.size(); ++k) {
            if (k == i || !(beta_[k] > -config_.c)) {
                continue;
            }
            const double slope = sel.max_up - down_derivative(beta_[k], f_[k], config_.epsilon);
            if (!(slope > 0.0)) {
                continue;
            }
            const double curvature =
                std::max(k_ii + gram_.diagonal(k) - 2.0 * row_i[k], kMinCurvature);
            const double score = slope * slope / curvature;
            if (score > best_score) {
                best_score = score;
                best = k;
            }
        }
        return best;
    }

    bool apply_pair(std::size_t i, std::size_t j) {
        if (i == j) {
            return false;
        }
        const auto row_i = gram_.row(i, buffer_i_);
        const PairInputs inputs{beta_[i], beta_[j], f_[i], f_[j], gram_.diagonal(i),
                                gram_.diagonal(j), row_i[j], config_.c, config_.epsilon};
        const PairMove move = solve_pair(inputs);
        // Callers only request pairs whose directional derivative is positive,
        // so the best candidate is an ascent step even when its computed gain
        // is lost in rounding.
        if (move.beta_i == beta_[i] && move.beta_j == beta_[j]) {
            return false;
        }
        const double di = move.beta_i - beta_[i];
        const double dj = move.beta_j - beta_[j];
        const auto row_j = gram_.row(j, buffer_j_);
        simd::add_scaled_pair(f_, -di, row_i, -dj, row_j);
        beta_[i] = move.beta_i;
        beta_[j] = move.beta_j;
        return true;
    }

    // Fallback when the maximal violating pair makes no numerical progress:
    // sweep every pair in index order and take any improving update.
    bool full_pass(SolveStats& stats, std::size_t max_steps) {
        const std::size_t n = beta_.size();
        bool any = false;
        for (std::size_t i = 0; i < n && stats.steps < max_steps; ++i) {
            for (std::size_t j = i + 1; j < n && stats.steps < max_steps; ++j) {
                for (const auto& [up, down] : {std::pair{i, j}, std::pair{j, i}}) {
                    if (!(beta_[up] < config_.c) || !(beta_[down] > -config_.c)) {
                        continue;
                    }
                    const double d = up_derivative(beta_[up], f_[up], config_.epsilon) -
                                     down_derivative(beta_[down], f_[down], config_.epsilon);
                    if (d > config_.kkt_tolerance && apply_pair(up, down)) {
                        any = true;
                        ++stats.steps;
                    }
                }
            }
        }
        return any;
    }

    const TrainConfig& config_;
    std::span<const double> ys_;
    detail::GramMatrix gram_;
    std::vector<double> beta_;
    std::vector<double> f_;
    std::vector<double> buffer_i_;
    std::vector<double> buffer_j_;
};

}  // namespace

TrainResult train(const TrainConfig& config, const Matrix& xs, std::span<const double> ys) {
    config.validate();
    validate_training_set(xs, ys);

    SmoSolver solver(config, xs, ys);
    SolveStats stats = solver.run();
    const double bias = solver.bias();

    Matrix support(0, xs.cols());
    std::vector<double> betas;
    for (std::size_t k = 0; k < stats.betas.size(); ++k) {
        if (stats.betas[k] != 0.0) {
            support.append_row(xs.row(k));
            betas.push_back(stats.betas[k]);
        }
    }
    SvrModel model(config.kernel, xs.cols(), std::move(support), std::move(betas), bias);
    return {std::move(model), std::move(stats)};
}

double dual_objective(const TrainConfig& config, const Matrix& xs, std::span<const double> ys,
                      std::span<const double> betas) {
    config.validate();
    if (xs.rows() != ys.size() || ys.size() != betas.size()) {
        throw Error(ErrorKind::DimensionMismatch, "xs, ys and betas must have equal length");
    }
    double sum = 0.0;
    for (double b : betas) {
        if (!std::isfinite(b) || std::abs(b) > config.c + config.kkt_tolerance) {
            throw Error(ErrorKind::InfeasiblePoint, "beta outside [-C, C]");
        }
        sum += b;
    }
    if (std::abs(sum) > config.kkt_tolerance) {
        throw Error(ErrorKind::InfeasiblePoint, "sum of betas is " + std::to_string(sum));
    }
    const std::size_t n = betas.size();
    double quad = 0.0;
    double linear = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (betas[i] == 0.0) {
            continue;
        }
        for (std::size_t j = 0; j < n; ++j) {
            quad += betas[i] * betas[j] * kernel_eval(config.kernel, xs.row(i), xs.row(j));
        }
        linear += ys[i] * betas[i] - config.epsilon * std::abs(betas[i]);
    }
    return -0.5 * quad + linear;
}

}  // namespace shiftcast::svr
