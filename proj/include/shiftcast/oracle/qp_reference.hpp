#pragma once

// Slow, independent reference solver for the epsilon-SVR dual. Shares no
// numerical code with shiftcast::svr; only the TrainConfig/Matrix value types.

#include <cstddef>
#include <span>
#include <vector>

#include "shiftcast/matrix.hpp"
#include "shiftcast/svr/svr.hpp"

namespace shiftcast::oracle {

struct OracleSolution {
    std::vector<double> betas;
    double dual_objective = 0.0;
    double bias = 0.0;
    std::size_t iterations = 0;
};

struct OracleOptions {
    std::size_t max_iterations = 2'000'000;
    double stall_change = 1e-14;
    std::size_t stall_window = 1000;
};

inline constexpr std::size_t kMaxOracleRows = 64;

/// Accelerated proximal-gradient ascent on the dual. Each step applies the
/// exact proximal map of eps*|beta|_1 restricted to {sum beta = 0} and the
/// [-C, C] box. Returns the best iterate seen.
/// Throws Error(TooLarge) for more than kMaxOracleRows rows and
/// Error(NonFiniteInput) on NaN/inf.
OracleSolution qp_reference_solve(const svr::TrainConfig& config, const Matrix& xs,
                                  std::span<const double> ys, const OracleOptions& options = {});

/// sum_i beta_i k(x_i, x) + bias, evaluated with the oracle's own kernel code.
double reference_predict(const svr::TrainConfig& config, const Matrix& xs,
                         const OracleSolution& solution, std::span<const double> x);

/// Dual objective evaluated with the oracle's own kernel code (no feasibility check).
double reference_objective(const svr::TrainConfig& config, const Matrix& xs,
                           std::span<const double> ys, std::span<const double> betas);

/// Euclidean projection of v - tau*sign-shrinkage onto {sum = 0} and [-c, c]:
/// argmin_b 1/2 |b - v|^2 + tau |b|_1  s.t. sum b = 0, |b_i| <= c.
std::vector<double> prox_feasible(std::span<const double> v, double tau, double c);

}  // namespace shiftcast::oracle
