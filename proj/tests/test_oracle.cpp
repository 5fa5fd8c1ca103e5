#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "shiftcast/error.hpp"
#include "shiftcast/oracle/qp_reference.hpp"
#include "shiftcast/svr/svr.hpp"
#include "test_support.hpp"

using namespace shiftcast;

namespace {

svr::TrainConfig linear_config(double c, double eps) {
    svr::TrainConfig cfg;
    cfg.c = c;
    cfg.epsilon = eps;
    cfg.kernel = svr::KernelSpec::linear();
    cfg.kkt_tolerance = 1e-9;
    cfg.max_epochs = 100000;
    return cfg;
}

}  // namespace

TEST_CASE("zero targets give the zero solution") {
    const Matrix xs(3, 1, {0.0, 0.5, 1.0});
    const auto sol = oracle::qp_reference_solve(linear_config(1.0, 0.0), xs,
                                                std::vector<double>(3, 0.0));
    for (double b : sol.betas) {
        CHECK(b == 0.0);
    }
    CHECK(sol.dual_objective == 0.0);
}

TEST_CASE("two-point reduced dual") {
    // beta = (-t, t): maximize -1/2 t^2 + t, so t = 1 and the optimum is 0.5.
    const Matrix xs(2, 1, {0.0, 1.0});
    const auto sol = oracle::qp_reference_solve(linear_config(10.0, 0.0), xs,
                                                std::vector<double>{0.0, 1.0});
    CHECK(sol.betas[0] == doctest::Approx(-1.0).epsilon(1e-6));
    CHECK(sol.betas[1] == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(sol.dual_objective == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(oracle::reference_predict(linear_config(10.0, 0.0), xs, sol,
                                    std::vector<double>{0.25}) == doctest::Approx(0.25));
}

TEST_CASE("random instances agree with the SMO solver") {
    for (std::uint64_t seed = 500; seed < 510; ++seed) {
        const auto inst = testing::random_instance(seed, seed % 2 == 0);
        const auto ref = oracle::qp_reference_solve(inst.config, inst.xs, inst.ys);
        const auto smo = svr::train(inst.config, inst.xs, inst.ys);
        CHECK(testing::relative_gap(ref.dual_objective, smo.stats.dual_objective) < 1e-6);
    }
}

TEST_CASE("returned iterates are feasible and no worse than zero") {
    for (std::uint64_t seed = 1; seed < 30; ++seed) {
        auto inst = testing::random_instance(seed, seed % 3 == 0);
        inst.config.seed = seed;  // random starting point
        const auto sol = oracle::qp_reference_solve(inst.config, inst.xs, inst.ys);
        const double sum = std::accumulate(sol.betas.begin(), sol.betas.end(), 0.0);
        CHECK(std::abs(sum) <= 1e-9);
        for (double b : sol.betas) {
            CHECK(std::abs(b) <= inst.config.c + 1e-9);
        }
        CHECK(sol.dual_objective >= 0.0);
    }
}

TEST_CASE("deterministic for a fixed seed") {
    auto inst = testing::random_instance(77, true);
    inst.config.seed = 9;
    const auto a = oracle::qp_reference_solve(inst.config, inst.xs, inst.ys);
    const auto b = oracle::qp_reference_solve(inst.config, inst.xs, inst.ys);
    CHECK(a.betas == b.betas);
    CHECK(a.iterations == b.iterations);
}

TEST_CASE("proximal map satisfies its optimality conditions") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> unit(-3.0, 3.0);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<double> v(1 + trial % 9);
        for (double& x : v) {
            x = unit(rng);
        }
        const double tau = (trial % 4) * 0.3;
        const double c = 0.5 + (trial % 3);
        const auto b = oracle::prox_feasible(v, tau, c);
        CHECK(std::abs(std::accumulate(b.begin(), b.end(), 0.0)) <= 1e-9);
        // Brute-force check: no feasible pairwise transfer lowers the prox objective.
        auto prox_objective = [&](const std::vector<double>& x) {
            double s = 0.0;
            for (std::size_t i = 0; i < x.size(); ++i) {
                s += 0.5 * (x[i] - v[i]) * (x[i] - v[i]) + tau * std::abs(x[i]);
            }
            return s;
        };
        const double base = prox_objective(b);
        for (std::size_t i = 0; i < b.size(); ++i) {
            for (std::size_t j = 0; j < b.size(); ++j) {
                if (i == j) continue;
                for (double h : {1e-4, 1e-2}) {
                    auto moved = b;
                    moved[i] += h;
                    moved[j] -= h;
                    if (std::abs(moved[i]) <= c && std::abs(moved[j]) <= c) {
                        CHECK(prox_objective(moved) >= base - 1e-12);
                    }
                }
            }
        }
    }
}

TEST_CASE("error paths") {
    Matrix big(65, 1);
    try {
        (void)oracle::qp_reference_solve(linear_config(1.0, 0.1), big, std::vector<double>(65));
        FAIL("expected TooLarge");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::TooLarge);
    }
    try {
        (void)oracle::qp_reference_solve(linear_config(1.0, 0.1), Matrix(1, 1, {INFINITY}),
                                         std::vector<double>{0.0});
        FAIL("expected NonFiniteInput");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::NonFiniteInput);
    }
}
