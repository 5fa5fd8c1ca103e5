#include "shiftcast/oracle/qp_reference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "shiftcast/error.hpp"

namespace shiftcast::oracle {
namespace {

double plain_kernel(const svr::KernelSpec& kernel, std::span<const double> u,
                    std::span<const double> v) {
    if (kernel.variant() == svr::KernelVariant::Linear) {
        double s = 0.0;
        for (std::size_t k = 0; k < u.size(); ++k) {
            s += u[k] * v[k];
        }
        return s;
    }
    double s = 0.0;
    for (std::size_t k = 0; k < u.size(); ++k) {
        s += (u[k] - v[k]) * (u[k] - v[k]);
    }
    return std::exp(-kernel.gamma() * s);
}

std::vector<double> gram(const svr::KernelSpec& kernel, const Matrix& xs) {
    const std::size_t n = xs.rows();
    std::vector<double> k(n * n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
            k[i * n + j] = plain_kernel(kernel, xs.row(i), xs.row(j));
            k[j * n + i] = k[i * n + j];
        }
    }
    return k;
}

double objective(std::span<const double> k, std::span<const double> ys, double eps,
                 std::span<const double> beta) {
    const std::size_t n = beta.size();
    double quad = 0.0;
    double lin = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double row = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            row += k[i * n + j] * beta[j];
        }
        quad += beta[i] * row;
        lin += ys[i] * beta[i] - eps * std::abs(beta[i]);
    }
    return -0.5 * quad + lin;
}

double shrink_clip(double v, double tau, double c) {
    const double soft = v > tau ? v - tau : (v < -tau ? v + tau : 0.0);
    return std::clamp(soft, -c, c);
}

double shifted_sum(std::span<const double> v, double tau, double c, double lambda) {
    double s = 0.0;
    for (double vi : v) {
        s += shrink_clip(vi - lambda, tau, c);
    }
    return s;
}

}  // namespace

std::vector<double> prox_feasible(std::span<const double> v, double tau, double c) {
    // The optimality conditions give b_i = shrink_clip(v_i - lambda) for the
    // multiplier lambda of the equality constraint. The sum is piecewise linear
    // and non-increasing in lambda with kinks at v_i +- tau and v_i +- (tau + c),
    // so the root is found exactly by locating its segment.
    std::vector<double> kinks;
    kinks.reserve(4 * v.size());
    for (double vi : v) {
        kinks.push_back(vi - tau - c);
        kinks.push_back(vi - tau);
        kinks.push_back(vi + tau);
        kinks.push_back(vi + tau + c);
    }
    std::sort(kinks.begin(), kinks.end());

    // First kink where the sum is <= 0.
    std::size_t lo = 0;
    std::size_t hi = kinks.size() - 1;
    if (shifted_sum(v, tau, c, kinks[lo]) <= 0.0) {
        hi = lo;
    } else {
        while (hi - lo > 1) {
            const std::size_t mid = lo + (hi - lo) / 2;
            if (shifted_sum(v, tau, c, kinks[mid]) > 0.0) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
    }

    double lambda = kinks[hi];
    if (hi != lo) {
        const double s_lo = shifted_sum(v, tau, c, kinks[lo]);
        const double s_hi = shifted_sum(v, tau, c, kinks[hi]);
        if (s_lo != s_hi) {
            lambda = kinks[lo] + (kinks[hi] - kinks[lo]) * s_lo / (s_lo - s_hi);
        }
    }

    std::vector<double> out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        out[i] = shrink_clip(v[i] - lambda, tau, c);
    }
    return out;
}

OracleSolution qp_reference_solve(const svr::TrainConfig& config, const Matrix& xs,
                                  std::span<const double> ys, const OracleOptions& options) {
    const std::size_t n = xs.rows();
    if (n > kMaxOracleRows) {
        throw Error(ErrorKind::TooLarge,
                    "reference solver accepts at most 64 rows, got " + std::to_string(n));
    }
    if (n != ys.size()) {
        throw Error(ErrorKind::DimensionMismatch, "xs and ys differ in length");
    }
    if (n == 0) {
        throw Error(ErrorKind::EmptyTrainingSet, "no rows");
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
    const double c = config.c;
    const double eps = config.epsilon;
    const std::vector<double> k = gram(config.kernel, xs);

    // Gershgorin bound on the largest eigenvalue.
    double lipschitz = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double row = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            row += std::abs(k[i * n + j]);
        }
        lipschitz = std::max(lipschitz, row);
    }
    const double step = lipschitz > 0.0 ? 1.0 / lipschitz : 1.0;

    std::vector<double> beta(n, 0.0);
    if (config.seed != 0) {
        std::mt19937_64 rng(config.seed);
        std::uniform_real_distribution<double> unit(-c, c);
        for (double& b : beta) {
            b = unit(rng);
        }
        beta = prox_feasible(beta, 0.0, c);
    }

    OracleSolution best;
    best.betas = beta;
    best.dual_objective = objective(k, ys, eps, beta);

    std::vector<double> momentum = beta;
    std::vector<double> previous = beta;
    std::vector<double> trial(n);
    double theta = 1.0;
    double last_value = best.dual_objective;
    std::size_t quiet_steps = 0;
    std::size_t it = 0;
    for (; it < options.max_iterations; ++it) {
        // Gradient step on the smooth part 1/2 b'Kb - y'b, evaluated at the momentum point.
        for (std::size_t i = 0; i < n; ++i) {
            double grad = -ys[i];
            for (std::size_t j = 0; j < n; ++j) {
                grad += k[i * n + j] * momentum[j];
            }
            trial[i] = momentum[i] - step * grad;
        }
        beta = prox_feasible(trial, step * eps, c);

        const double value = objective(k, ys, eps, beta);
        if (value > best.dual_objective) {
            best.dual_objective = value;
            best.betas = beta;
        }

        // Restart the momentum whenever the step stops being an ascent direction.
        double restart_test = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            restart_test += (momentum[i] - beta[i]) * (beta[i] - previous[i]);
        }
        if (restart_test > 0.0) {
            theta = 1.0;
            momentum = beta;
        } else {
            const double next_theta = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * theta * theta));
            const double weight = (theta - 1.0) / next_theta;
            for (std::size_t i = 0; i < n; ++i) {
                momentum[i] = beta[i] + weight * (beta[i] - previous[i]);
            }
            theta = next_theta;
        }
        previous = beta;

        if (std::abs(value - last_value) < options.stall_change) {
            if (++quiet_steps >= options.stall_window) {
                ++it;
                break;
            }
        } else {
            quiet_steps = 0;
        }
        last_value = value;
    }
    best.iterations = it;

    // Bias from the KKT conditions of the returned point. Coefficients within
    // a relative 1e-9 of zero or of the box are treated as bounded.
    const double snap = 1e-9 * std::max(1.0, c);
    double sum = 0.0;
    std::size_t free_count = 0;
    double lower = -std::numeric_limits<double>::infinity();
    double upper = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
        double fi = ys[i];
        for (std::size_t j = 0; j < n; ++j) {
            fi -= k[i * n + j] * best.betas[j];
        }
        const double b = best.betas[i];
        if (std::abs(b) <= snap) {
            lower = std::max(lower, fi - eps);
            upper = std::min(upper, fi + eps);
        } else if (b >= c - snap) {
            upper = std::min(upper, fi - eps);
        } else if (b <= -c + snap) {
            lower = std::max(lower, fi + eps);
        } else {
            sum += b > 0.0 ? fi - eps : fi + eps;
            ++free_count;
        }
    }
    if (free_count > 0) {
        best.bias = sum / static_cast<double>(free_count);
    } else if (std::isfinite(lower) && std::isfinite(upper)) {
        best.bias = 0.5 * (lower + upper);
    } else {
        best.bias = std::isfinite(lower) ? lower : (std::isfinite(upper) ? upper : 0.0);
    }
    return best;
}

double reference_predict(const svr::TrainConfig& config, const Matrix& xs,
                         const OracleSolution& solution, std::span<const double> x) {
    double f = solution.bias;
    for (std::size_t i = 0; i < xs.rows(); ++i) {
        f += solution.betas[i] * plain_kernel(config.kernel, xs.row(i), x);
    }
    return f;
}

double reference_objective(const svr::TrainConfig& config, const Matrix& xs,
                           std::span<const double> ys, std::span<const double> betas) {
    return objective(gram(config.kernel, xs), ys, config.epsilon, betas);
}

}  // namespace shiftcast::oracle
