// Acceptance checks: one PASS/FAIL line per criterion, nonzero exit on any FAIL.
// Criteria that name a command run the shiftcast binary; the rest use the library.

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "shiftcast/domain/pipeline.hpp"
#include "shiftcast/domain/records_io.hpp"
#include "shiftcast/io/csv.hpp"
#include "shiftcast/modelsel/modelsel.hpp"
#include "shiftcast/oracle/qp_reference.hpp"
#include "shiftcast/svr/svr.hpp"
#include "shiftcast/synthline/synthline.hpp"
#include "test_support.hpp"

namespace fs = std::filesystem;
using namespace shiftcast;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(double v, int digits = 6) {
    std::ostringstream ss;
    ss.precision(digits);
    ss << v;
    return ss.str();
}

const fs::path& workdir() {
    static const fs::path dir = [] {
        auto d = fs::temp_directory_path() / "shiftcast_acceptance";
        fs::remove_all(d);
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

// Runs the CLI inside the work directory; throws on nonzero exit.
void cli(const std::string& args) {
    const std::string cmd = "cd '" + workdir().string() + "' && '" SHIFTCAST_BIN "' " + args +
                            " >/dev/null 2>>'" + (workdir() / "stderr.txt").string() + "'";
    const int status = std::system(cmd.c_str());
    if (!WIFEXITED(status) || WEXITSTATUS(status) != 0) {
        throw std::runtime_error("command failed: shiftcast " + args);
    }
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

io::CsvTable table(const fs::path& relative) { return io::read_csv_file(workdir() / relative); }

// Generates the default dataset and its C0402 feature file once.
void ensure_default_dataset() {
    static bool done = false;
    if (done) return;
    cli("generate --out default --seed 0");
    cli("featurize --spi default/spi.csv --aoi default/aoi.csv --out default/features.csv");
    done = true;
}

std::vector<domain::FeatureRow> noiseless_linear_rows() {
    synthline::GeneratorConfig cfg = synthline::GeneratorConfig{}.noiseless();
    cfg.mode = synthline::Mode::Linear;
    const std::vector<domain::ComponentSpec> c0402{
        *domain::find_spec(domain::builtin_specs(), "C0402")};
    const auto data = synthline::generate(cfg, synthline::builtin_design(), c0402);
    return domain::join_spi_aoi(data.deposits, data.placements, domain::builtin_specs()).rows;
}

// ---------------------------------------------------------------------------

Outcome oracle_equivalence() {
    const auto t0 = Clock::now();
    double worst_obj = 0.0;
    double worst_pred = 0.0;
    for (std::uint64_t seed = 1; seed <= 50; ++seed) {
        const auto inst = testing::random_instance(seed, seed % 2 == 0);
        const auto ref = oracle::qp_reference_solve(inst.config, inst.xs, inst.ys);
        const auto smo = svr::train(inst.config, inst.xs, inst.ys);
        worst_obj = std::max(worst_obj,
                             testing::relative_gap(ref.dual_objective, smo.stats.dual_objective));
        for (const auto& p : inst.probes) {
            const double a = smo.model.predict(p);
            const double b = oracle::reference_predict(inst.config, inst.xs, ref, p);
            worst_pred = std::max(worst_pred, std::abs(a - b));
        }
    }
    const double elapsed = seconds_since(t0);
    return {worst_obj <= 1e-6 && worst_pred <= 1e-4 && elapsed < 120.0,
            "50 instances, max objective rel gap " + fmt(worst_obj) + ", max prediction gap " +
                fmt(worst_pred) + ", " + fmt(elapsed, 3) + " s"};
}

Outcome kkt_suite() {
    double worst_sum = 0.0;
    double worst_box = 0.0;
    double worst_tube = 0.0;
    for (std::uint64_t seed = 1; seed <= 50; ++seed) {
        auto inst = testing::random_instance(seed, seed % 2 == 0);
        inst.config.kkt_tolerance = 1e-3;
        const auto fit = svr::train(inst.config, inst.xs, inst.ys);
        const auto& betas = fit.stats.betas;
        const double c = inst.config.c;
        const double eps = inst.config.epsilon;
        worst_sum = std::max(worst_sum, std::abs(std::accumulate(betas.begin(), betas.end(), 0.0)));
        for (std::size_t i = 0; i < betas.size(); ++i) {
            worst_box = std::max(worst_box, std::abs(betas[i]) - c);
            // f(x_i) - y_i: beta = 0 inside the tube, interior beta on its edge,
            // beta = +C below it and beta = -C above it.
            const double r = fit.model.predict(inst.xs.row(i)) - inst.ys[i];
            double violation = 0.0;
            const double b = betas[i];
            if (b == 0.0) {
                violation = std::max(0.0, std::abs(r) - eps);
            } else if (b > 0.0 && b < c) {
                violation = std::abs(r + eps);
            } else if (b < 0.0 && b > -c) {
                violation = std::abs(r - eps);
            } else if (b >= c) {
                violation = std::max(0.0, r + eps);
            } else {
                violation = std::max(0.0, -(r - eps));
            }
            worst_tube = std::max(worst_tube, violation);
        }
    }
    return {worst_sum <= 1e-3 && worst_box <= 1e-3 && worst_tube <= 1e-2,
            "max |sum beta| " + fmt(worst_sum) + ", max box excess " + fmt(worst_box) +
                ", max tube violation " + fmt(worst_tube)};
}

Outcome metric_invariant() {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> unit(-5.0, 5.0);
    std::uniform_int_distribution<int> len(1, 50);
    std::size_t violations = 0;
    std::size_t strict = 0;
    const std::vector<double> zeros(50, 0.0);
    for (int t = 0; t < 1000; ++t) {
        std::vector<double> r(static_cast<std::size_t>(len(rng)));
        for (double& v : r) v = unit(rng);
        const std::span<const double> z(zeros.data(), r.size());
        const double m = modelsel::mae(r, z);
        const double s = modelsel::rmse(r, z);
        if (m > s) ++violations;
        bool equal_magnitude = true;
        for (double v : r) equal_magnitude = equal_magnitude && std::abs(v) == std::abs(r[0]);
        if (equal_magnitude ? m != s : !(m < s)) ++violations;
        if (m < s) ++strict;
    }
    // Constructed cases: equal magnitudes give equality, unequal give strict <.
    std::size_t constructed_fail = 0;
    for (double a : {0.0, 0.5, 1.0, 3.0}) {
        for (std::size_t n : {1U, 2U, 7U, 64U}) {
            std::vector<double> r(n);
            for (std::size_t i = 0; i < n; ++i) r[i] = i % 2 == 0 ? a : -a;
            const std::vector<double> z(n, 0.0);
            if (modelsel::mae(r, z) != modelsel::rmse(r, z)) ++constructed_fail;
            r[0] += 1.0;
            if (n > 1 && !(modelsel::mae(r, z) < modelsel::rmse(r, z))) ++constructed_fail;
        }
    }
    return {violations == 0 && constructed_fail == 0,
            "1000 random vectors, " + std::to_string(violations) + " violations, " +
                std::to_string(strict) + " strict; " + std::to_string(constructed_fail) +
                " constructed-case failures"};
}

Outcome noiseless_recovery() {
    const auto t0 = Clock::now();
    const auto rows = noiseless_linear_rows();
    svr::TrainConfig cfg;
    cfg.c = 1.0;
    cfg.epsilon = 0.001;
    std::string detail = std::to_string(rows.size()) + " rows";
    double worst = 0.0;
    for (const auto target : domain::kAllTargets) {
        const auto cv = modelsel::cross_validate(cfg, rows, target, 10, 0);
        worst = std::max(worst, cv.mean_rmse);
        detail += ", " + std::string(domain::target_name(target)) + " " + fmt(cv.mean_rmse);
    }
    const double elapsed = seconds_since(t0);
    return {rows.size() == 660 && worst <= 0.002 && elapsed < 60.0,
            detail + ", " + fmt(elapsed, 3) + " s"};
}

Outcome rbf_beats_linear() {
    const auto t0 = Clock::now();
    ensure_default_dataset();
    cli("evaluate --features default/features.csv --out default/evaluate");
    const auto report = table("default/evaluate/report.csv");
    std::map<std::pair<std::string, std::string>, double> rmse;
    for (const auto& rec : report.records()) {
        rmse[{report.text(rec, report.column("model")), report.text(rec, report.column("target"))}] =
            report.number(rec, report.column("rmse"));
    }
    const double lx = rmse.at({"SVR-Linear", "shift_x_ratio"});
    const double rx = rmse.at({"SVR-RBF", "shift_x_ratio"});
    const double ly = rmse.at({"SVR-Linear", "shift_y_ratio"});
    const double ry = rmse.at({"SVR-RBF", "shift_y_ratio"});
    const double elapsed = seconds_since(t0);
    return {rx <= lx && ry <= ly && elapsed < 300.0,
            "X rbf " + fmt(rx) + " vs linear " + fmt(lx) + ", Y rbf " + fmt(ry) + " vs linear " +
                fmt(ly) + ", " + fmt(elapsed, 3) + " s"};
}

Outcome x_easier_than_y() {
    const auto t0 = Clock::now();
    ensure_default_dataset();
    cli("tune --features default/features.csv --target x --out default/tune_x");
    cli("tune --features default/features.csv --target y --out default/tune_y");
    auto best_rmse = [](const std::string& dir) {
        const std::string text = slurp(workdir() / dir / "best_config.json");
        const auto pos = text.find("\"mean_rmse\":");
        return std::stod(text.substr(pos + 12));
    };
    const double x = best_rmse("default/tune_x");
    const double y = best_rmse("default/tune_y");
    const std::size_t points = table("default/tune_x/tune_results.csv").records().size();
    return {x <= y, "tuned rbf (" + std::to_string(points) + " grid points) X " + fmt(x) +
                        " vs Y " + fmt(y) + ", " + fmt(seconds_since(t0), 3) + " s"};
}

Outcome dataset_shape() {
    ensure_default_dataset();
    const auto aoi = table("default/aoi.csv").records().size();
    const auto spi = table("default/spi.csv").records().size();
    cli("summarize --features default/features.csv --out default/summary.csv");
    const auto summary = table("default/summary.csv");
    const std::vector<std::string> expected{
        "setting",       "x_avg_um",      "x_std_um",      "x_min_um",     "x_max_um",
        "y_avg_um",      "y_std_um",      "y_min_um",      "y_max_um",     "angle_avg_deg",
        "angle_std_deg", "angle_min_deg", "angle_max_deg", "count"};
    const bool schema = summary.header() == expected && summary.records().size() == 33;
    // Reference C0402 per-setting std ranges widened by 50% on each side.
    struct Band {
        const char* column;
        double lo;
        double hi;
    };
    const Band bands[] = {{"x_std_um", 0.5 * 8.8, 1.5 * 11.0},
                          {"y_std_um", 0.5 * 9.8, 1.5 * 22.6},
                          {"angle_std_deg", 0.5 * 0.5, 1.5 * 0.6}};
    bool in_band = true;
    std::string ranges;
    for (const auto& b : bands) {
        double lo = INFINITY;
        double hi = -INFINITY;
        for (const auto& rec : summary.records()) {
            const double v = summary.number(rec, summary.column(b.column));
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        in_band = in_band && lo >= b.lo && hi <= b.hi;
        ranges += std::string(", ") + b.column + " " + fmt(lo, 3) + ".." + fmt(hi, 3) + " in [" +
                  fmt(b.lo, 3) + ", " + fmt(b.hi, 3) + "]";
    }
    return {aoi == 3960 && spi == 7920 && schema && in_band,
            std::to_string(aoi) + " AOI rows, " + std::to_string(spi) + " SPI rows, schema " +
                (schema ? "ok" : "mismatch") + ranges};
}

Outcome determinism() {
    // Each command runs twice into the same outputs; every file must match byte for byte.
    const std::vector<std::pair<std::string, std::vector<std::string>>> commands{
        {"generate --out det --seed 17 --replications 2",
         {"det/spi.csv", "det/aoi.csv", "det/truth.csv", "det/manifest.json",
          "det/generate.config.json"}},
        {"featurize --spi det/spi.csv --aoi det/aoi.csv --out det/f.csv",
         {"det/f.csv", "det/f.csv.diagnostics.json", "det/f.csv.config.json"}},
        {"summarize --features det/f.csv --out det/s.csv", {"det/s.csv", "det/s.csv.config.json"}},
        {"train --features det/f.csv --target y --model-out det/m.json",
         {"det/m.json", "det/m.json.config.json"}},
        {"predict --model det/m.json --features det/f.csv --out det/p.csv",
         {"det/p.csv", "det/p.csv.config.json"}},
    };
    // Parallel variants: the second run uses a different thread count.
    const std::vector<std::tuple<std::string, std::string, std::vector<std::string>>> parallel{
        {"tune --features det/f.csv --target x --k 5 --threads 1 --out det/tune",
         "tune --features det/f.csv --target x --k 5 --threads 8 --out det/tune",
         {"det/tune/tune_results.csv", "det/tune/best_config.json", "det/tune/tune.config.json"}},
        {"evaluate --features det/f.csv --k 5 --threads 1 --out det/eval",
         "evaluate --features det/f.csv --k 5 --threads 8 --out det/eval",
         {"det/eval/report.csv", "det/eval/report.txt", "det/eval/evaluate.config.json"}},
        {"sweep-k --features det/f.csv --k-min 2 --k-max 8 --threads 1 --out det/k.csv",
         "sweep-k --features det/f.csv --k-min 2 --k-max 8 --threads 8 --out det/k.csv",
         {"det/k.csv", "det/k.csv.config.json"}},
    };
    std::size_t files = 0;
    std::vector<std::string> mismatched;
    auto compare_runs = [&](const std::string& first, const std::string& second,
                            const std::vector<std::string>& outputs) {
        cli(first);
        std::vector<std::string> before;
        for (const auto& f : outputs) before.push_back(slurp(workdir() / f));
        for (const auto& f : outputs) fs::remove(workdir() / f);
        cli(second);
        for (std::size_t i = 0; i < outputs.size(); ++i) {
            ++files;
            if (before[i].empty() || slurp(workdir() / outputs[i]) != before[i]) {
                mismatched.push_back(outputs[i]);
            }
        }
    };
    for (const auto& [cmd, outputs] : commands) compare_runs(cmd, cmd, outputs);
    for (const auto& [a, b, outputs] : parallel) compare_runs(a, b, outputs);
    std::string detail = std::to_string(files) + " files across " +
                         std::to_string(commands.size() + parallel.size()) + " commands";
    for (const auto& m : mismatched) detail += ", differs: " + m;
    return {mismatched.empty(), detail};
}

Outcome k_sweep() {
    const auto rows = noiseless_linear_rows();
    io::write_text_file(workdir() / "sweep/noiseless.csv", domain::features_csv(rows));
    double worst_spread = 0.0;
    std::size_t points_total = 0;
    bool all_finite = true;
    bool all_19 = true;
    std::string detail;
    for (const char* target : {"x", "y", "angle"}) {
        const std::string out = std::string("sweep/k_") + target + ".csv";
        cli(std::string("sweep-k --features sweep/noiseless.csv --target ") + target +
            " --kernel linear --c 1 --epsilon 0.001 --k-min 2 --k-max 20 --out " + out);
        const auto t = table(out);
        double lo = INFINITY;
        double hi = -INFINITY;
        for (const auto& rec : t.records()) {
            const double v = t.number(rec, t.column("rmse"));
            all_finite = all_finite && std::isfinite(v);
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        all_19 = all_19 && t.records().size() == 19;
        points_total += t.records().size();
        worst_spread = std::max(worst_spread, hi - lo);
        detail += std::string(detail.empty() ? "" : ", ") + target + " spread " + fmt(hi - lo);
    }
    return {all_19 && all_finite && worst_spread <= 0.002,
            std::to_string(points_total) + " points over 3 targets, " + detail};
}

}  // namespace

int main() {
    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
        {"oracle equivalence", oracle_equivalence},
        {"KKT conditions", kkt_suite},
        {"metric invariant mae <= rmse", metric_invariant},
        {"noiseless linear recovery", noiseless_recovery},
        {"RBF beats linear on shift X and Y", rbf_beats_linear},
        {"tuned RBF: shift X easier than shift Y", x_easier_than_y},
        {"dataset shape and summary spread", dataset_shape},
        {"determinism", determinism},
        {"k-sweep", k_sweep},
    };
    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failures += o.pass ? 0 : 1;
        std::printf("%s %zu %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first,
                    o.detail.c_str());
        std::fflush(stdout);
    }
    return failures == 0 ? 0 : 1;
}
