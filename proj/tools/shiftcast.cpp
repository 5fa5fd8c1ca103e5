// shiftcast: component-shift prediction pipeline on SPI/AOI data.
//
//   generate   synthetic SPI/AOI/truth files for the DOE layout
//   featurize  join SPI and AOI records into feature rows
//   train      fit one SVR model for one shift target
//   tune       grid search with k-fold cross-validation
//   evaluate   cross-validated MAE/RMSE per (model, target)
//   sweep-k    cross-validated RMSE for a range of k
//   summarize  per-setting shift statistics in physical units
//   predict    apply a saved model to a feature file
//
// Every command writes <output>.config.json (or <dir>/<command>.config.json)
// holding the resolved parameters and an argv that reproduces the run.

#include <charconv>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "shiftcast/domain/pipeline.hpp"
#include "shiftcast/domain/records_io.hpp"
#include "shiftcast/error.hpp"
#include "shiftcast/io/csv.hpp"
#include "shiftcast/modelsel/modelsel.hpp"
#include "shiftcast/oracle/qp_reference.hpp"
#include "shiftcast/svr/model_io.hpp"
#include "shiftcast/synthline/synthline.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;
using namespace shiftcast;

namespace {

constexpr const char* kProgram = "shiftcast";
constexpr int kUsageError = 2;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Resolved parameters of one run, kept both as JSON and as a replay argv.
class ConfigEcho {
public:
    explicit ConfigEcho(std::string command) : command_(std::move(command)) {
        argv_.push_back(kProgram);
        argv_.push_back(command_);
    }

    void add(const std::string& flag, const std::string& value) {
        params_[flag] = value;
        argv_.push_back("--" + flag);
        argv_.push_back(value);
    }
    void add(const std::string& flag, double value) {
        params_[flag] = value;
        argv_.push_back("--" + flag);
        argv_.push_back(io::format_number(value));
    }
    void add(const std::string& flag, std::uint64_t value) {
        params_[flag] = value;
        argv_.push_back("--" + flag);
        argv_.push_back(std::to_string(value));
    }
    void add_list(const std::string& flag, const std::vector<std::string>& values) {
        params_[flag] = values;
        for (const auto& v : values) {
            argv_.push_back("--" + flag);
            argv_.push_back(v);
        }
    }
    void add_switch(const std::string& flag, bool on) {
        params_[flag] = on;
        if (on) argv_.push_back("--" + flag);
    }

    void write(const fs::path& path) const {
        ordered_json j;
        j["command"] = command_;
        j["params"] = params_;
        j["argv"] = argv_;
        io::write_text_file(path, j.dump(2) + "\n");
    }

private:
    std::string command_;
    ordered_json params_ = ordered_json::object();
    std::vector<std::string> argv_;
};

fs::path sidecar(const fs::path& output, const std::string& suffix) {
    return fs::path(output.string() + suffix);
}

std::uint64_t resolve_seed(const std::optional<std::uint64_t>& flag) {
    if (flag) return *flag;
    if (const char* env = std::getenv("SHIFTCAST_SEED"); env != nullptr && *env != '\0') {
        std::uint64_t value = 0;
        const std::string text(env);
        const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
        if (ec != std::errc{} || ptr != text.data() + text.size()) {
            throw UsageError("SHIFTCAST_SEED is not an unsigned integer: '" + text + "'");
        }
        return value;
    }
    return 0;
}

domain::Target resolve_target(const std::string& text) {
    const auto t = domain::parse_target(text);
    if (!t) {
        throw UsageError("unknown target '" + text +
                         "' (use x, y, angle or shift_x_ratio, shift_y_ratio, shift_angle_deg)");
    }
    return *t;
}

std::vector<domain::FeatureRow> load_features(const fs::path& path, bool require_targets = true) {
    return domain::read_features(io::read_csv_file(path), require_targets);
}

std::vector<domain::FeatureRow> filter_spec(std::vector<domain::FeatureRow> rows,
                                            const std::string& spec) {
    if (spec == "all") return rows;
    if (domain::find_spec(domain::builtin_specs(), spec) == nullptr) {
        throw Error(ErrorKind::UnknownSpec, "--spec names unknown spec '" + spec + "'");
    }
    std::erase_if(rows, [&](const domain::FeatureRow& r) { return r.spec_name != spec; });
    return rows;
}

// Kernel/C/epsilon/gamma flags shared by train, sweep-k and oracle-solve.
struct ModelFlags {
    std::string kernel = "rbf";
    double c = 0.13;
    double epsilon = 0.00097;
    double gamma = 1.0;
    double kkt_tolerance = 1e-3;
    std::size_t max_epochs = 1000;
    CLI::Option* gamma_option = nullptr;

    void attach(CLI::App* app) {
        app->add_option("--kernel", kernel, "linear or rbf")
            ->check(CLI::IsMember({"linear", "rbf"}))
            ->capture_default_str();
        app->add_option("--c", c, "Box constraint C")->capture_default_str();
        app->add_option("--epsilon", epsilon, "Tube half-width")->capture_default_str();
        gamma_option = app->add_option("--gamma", gamma, "RBF width (rbf only)")->capture_default_str();
        app->add_option("--kkt-tolerance", kkt_tolerance, "Solver stopping tolerance")
            ->capture_default_str();
        app->add_option("--max-epochs", max_epochs, "Solver epoch limit")->capture_default_str();
    }

    [[nodiscard]] svr::TrainConfig config(std::uint64_t seed) const {
        svr::TrainConfig cfg;
        cfg.c = c;
        cfg.epsilon = epsilon;
        cfg.kkt_tolerance = kkt_tolerance;
        cfg.max_epochs = max_epochs;
        cfg.seed = seed;
        if (kernel == "linear") {
            if (gamma_option != nullptr && gamma_option->count() > 0) {
                throw UsageError("--gamma is invalid for the linear kernel");
            }
        } else {
            cfg.kernel = svr::KernelSpec::rbf(gamma);
        }
        cfg.validate();
        return cfg;
    }

    void echo(ConfigEcho& e) const {
        e.add("kernel", kernel);
        e.add("c", c);
        e.add("epsilon", epsilon);
        if (kernel == "rbf") e.add("gamma", gamma);
        e.add("kkt-tolerance", kkt_tolerance);
        e.add("max-epochs", static_cast<std::uint64_t>(max_epochs));
    }
};

std::vector<std::string> feature_names() {
    return {domain::kFeatureNames.begin(), domain::kFeatureNames.end()};
}

std::string join_names(const std::vector<std::string>& names) {
    std::string out;
    for (std::size_t i = 0; i < names.size(); ++i) {
        if (i > 0) out += ',';
        out += names[i];
    }
    return out;
}

// ---------------------------------------------------------------------------
// generate

struct GenerateArgs {
    std::string out = "data";
    std::string mode = "nonlinear";
    std::size_t replications = 20;
    std::optional<std::uint64_t> seed;
    synthline::GeneratorConfig base{};
    bool noiseless = false;
};

void run_generate(GenerateArgs& a) {
    synthline::GeneratorConfig cfg = a.base;
    cfg.mode = a.mode == "linear" ? synthline::Mode::Linear : synthline::Mode::Nonlinear;
    cfg.replications = a.replications;
    cfg.seed = resolve_seed(a.seed);
    if (a.noiseless) cfg = cfg.noiseless();
    cfg.validate();

    const auto design = synthline::builtin_design();
    const auto specs = domain::builtin_specs();
    const auto data = synthline::generate(cfg, design, specs);
    const fs::path dir(a.out);
    io::write_text_file(dir / "spi.csv", domain::spi_csv(data.deposits));
    io::write_text_file(dir / "aoi.csv", domain::aoi_csv(data.placements));
    io::write_text_file(dir / "truth.csv", synthline::truth_csv(data));
    io::write_text_file(dir / "manifest.json", synthline::manifest_json(cfg, design, specs, data));

    ConfigEcho e("generate");
    e.add("out", a.out);
    e.add("mode", a.mode);
    e.add("replications", static_cast<std::uint64_t>(cfg.replications));
    e.add("seed", cfg.seed);
    e.add("noise-x", cfg.noise_std[0]);
    e.add("noise-y", cfg.noise_std[1]);
    e.add("noise-angle", cfg.noise_std[2]);
    e.add("spi-offset-std", cfg.spi_offset_std_um);
    e.add("spi-angle-std", cfg.spi_angle_std_deg);
    e.add("spi-volume-std", cfg.spi_volume_std_pct);
    e.write(dir / "generate.config.json");

    std::cout << "wrote " << data.placements.size() << " placements and " << data.deposits.size()
              << " deposits to " << dir.string() << "\n";
}

// ---------------------------------------------------------------------------
// featurize

struct FeaturizeArgs {
    std::string spi;
    std::string aoi;
    std::string out;
    std::string spec = "C0402";
};

void run_featurize(const FeaturizeArgs& a) {
    const auto deposits = domain::read_deposits(io::read_csv_file(a.spi));
    const auto placements =
        domain::read_placements(io::read_csv_file(a.aoi), domain::builtin_specs());
    auto joined = domain::join_spi_aoi(deposits, placements, domain::builtin_specs());
    const auto rows = filter_spec(std::move(joined.rows), a.spec);

    const fs::path out(a.out);
    io::write_text_file(out, domain::features_csv(rows));

    ordered_json diag;
    diag["rows"] = rows.size();
    ordered_json orphans = ordered_json::array();
    for (const auto& o : joined.diagnostics.orphan_placements) {
        orphans.push_back({{"board_id", o.board_id},
                           {"component_id", o.component_id},
                           {"reason", std::string(domain::to_string(o.reason))}});
    }
    diag["orphan_placements"] = orphans;
    ordered_json stray = ordered_json::array();
    for (const auto& o : joined.diagnostics.orphan_deposits) {
        stray.push_back(
            {{"board_id", o.board_id}, {"component_id", o.component_id}, {"pad_index", o.pad_index}});
    }
    diag["orphan_deposits"] = stray;
    io::write_text_file(sidecar(out, ".diagnostics.json"), diag.dump(2) + "\n");

    ConfigEcho e("featurize");
    e.add("spi", a.spi);
    e.add("aoi", a.aoi);
    e.add("out", a.out);
    e.add("spec", a.spec);
    e.write(sidecar(out, ".config.json"));

    if (!joined.diagnostics.clean()) {
        std::cerr << kProgram << ": warning: " << joined.diagnostics.orphan_placements.size()
                  << " orphan placements, " << joined.diagnostics.orphan_deposits.size()
                  << " orphan deposits (see " << sidecar(out, ".diagnostics.json").string()
                  << ")\n";
    }
    std::cout << "wrote " << rows.size() << " feature rows to " << out.string() << "\n";
}

// ---------------------------------------------------------------------------
// train

struct TrainArgs {
    std::string features;
    std::string target;
    std::string model_out;
    std::optional<std::uint64_t> seed;
    ModelFlags model;
};

void run_train(const TrainArgs& a) {
    const domain::Target target = resolve_target(a.target);
    const std::uint64_t seed = resolve_seed(a.seed);
    const svr::TrainConfig cfg = a.model.config(seed);
    const auto rows = load_features(a.features);
    const auto data = modelsel::make_dataset(rows, target);
    const auto fit = svr::train(cfg, data.xs, data.ys);

    svr::ModelFile file;
    file.model = fit.model;
    file.c = cfg.c;
    file.epsilon = cfg.epsilon;
    file.kkt_tolerance = cfg.kkt_tolerance;
    file.feature_names = feature_names();
    file.target_name = std::string(domain::target_name(target));
    file.converged = fit.stats.converged;
    const fs::path out(a.model_out);
    svr::save_model(out, file);

    ConfigEcho e("train");
    e.add("features", a.features);
    e.add("target", file.target_name);
    a.model.echo(e);
    e.add("seed", seed);
    e.add("model-out", a.model_out);
    e.write(sidecar(out, ".config.json"));

    if (!fit.stats.converged) {
        std::cerr << kProgram << ": warning: solver stopped after " << fit.stats.epochs_run
                  << " epochs with KKT gap " << fit.stats.kkt_gap
                  << "; model is flagged as not converged\n";
    }
    const auto predicted = fit.model.predict(data.xs);
    std::cout << "target " << file.target_name << ": " << fit.model.betas().size()
              << " support vectors, training MAE " << modelsel::mae(data.ys, predicted)
              << ", RMSE " << modelsel::rmse(data.ys, predicted) << "\n";
}

// ---------------------------------------------------------------------------
// tune

struct TuneArgs {
    std::string features;
    std::string target;
    std::string kernel = "rbf";
    std::string out = "tune";
    std::size_t k = 10;
    std::vector<double> cs;
    std::vector<double> epsilons;
    std::vector<double> gammas;
    double kkt_tolerance = 1e-3;
    std::size_t max_epochs = 1000;
    unsigned threads = 0;
    std::optional<std::uint64_t> seed;
};

std::vector<std::string> format_list(const std::vector<double>& values) {
    std::vector<std::string> out;
    for (double v : values) out.push_back(io::format_number(v));
    return out;
}

void run_tune(TuneArgs& a) {
    const domain::Target target = resolve_target(a.target);
    const std::uint64_t seed = resolve_seed(a.seed);
    const auto variant = a.kernel == "linear" ? svr::KernelVariant::Linear : svr::KernelVariant::Rbf;
    modelsel::Grid grid = modelsel::Grid::defaults(variant);
    if (!a.cs.empty()) grid.cs = a.cs;
    if (!a.epsilons.empty()) grid.epsilons = a.epsilons;
    if (!a.gammas.empty()) {
        if (variant == svr::KernelVariant::Linear) {
            throw UsageError("--gammas is invalid for the linear kernel");
        }
        grid.gammas = a.gammas;
    }
    if (variant == svr::KernelVariant::Linear) grid.gammas.clear();
    svr::TrainConfig base;
    base.kkt_tolerance = a.kkt_tolerance;
    base.max_epochs = a.max_epochs;
    base.seed = seed;

    const auto rows = load_features(a.features);
    const auto data = modelsel::make_dataset(rows, target);
    const auto result = modelsel::grid_search(grid, base, data, a.k, seed, a.threads);

    std::string csv = "c,epsilon,gamma,mean_mae,mean_rmse,not_converged_folds\n";
    for (const auto& row : result.table) {
        const std::array<std::string, 6> fields{
            io::format_number(row.config.c), io::format_number(row.config.epsilon),
            io::format_number(row.config.kernel.gamma()), io::format_number(row.cv.mean_mae),
            io::format_number(row.cv.mean_rmse), std::to_string(row.cv.not_converged)};
        csv += io::csv_line(fields);
    }
    const fs::path dir(a.out);
    io::write_text_file(dir / "tune_results.csv", csv);

    const auto& best = result.table[result.best_index];
    ordered_json b;
    b["target"] = std::string(domain::target_name(target));
    b["kernel"] = a.kernel;
    b["c"] = best.config.c;
    b["epsilon"] = best.config.epsilon;
    if (variant == svr::KernelVariant::Rbf) b["gamma"] = best.config.kernel.gamma();
    b["k"] = a.k;
    b["mean_mae"] = best.cv.mean_mae;
    b["mean_rmse"] = best.cv.mean_rmse;
    io::write_text_file(dir / "best_config.json", b.dump(2) + "\n");

    ConfigEcho e("tune");
    e.add("features", a.features);
    e.add("target", std::string(domain::target_name(target)));
    e.add("kernel", a.kernel);
    e.add("k", static_cast<std::uint64_t>(a.k));
    e.add_list("cs", format_list(grid.cs));
    e.add_list("epsilons", format_list(grid.epsilons));
    if (variant == svr::KernelVariant::Rbf) e.add_list("gammas", format_list(grid.gammas));
    e.add("kkt-tolerance", a.kkt_tolerance);
    e.add("max-epochs", static_cast<std::uint64_t>(a.max_epochs));
    e.add("seed", seed);
    e.add("out", a.out);
    e.write(dir / "tune.config.json");

    std::cout << "best of " << result.table.size() << ": C=" << io::format_number(best.config.c)
              << " epsilon=" << io::format_number(best.config.epsilon);
    if (variant == svr::KernelVariant::Rbf) {
        std::cout << " gamma=" << io::format_number(best.config.kernel.gamma());
    }
    std::cout << " mean RMSE " << best.cv.mean_rmse << "\n";
}

// ---------------------------------------------------------------------------
// evaluate

struct EvaluateArgs {
    std::string features;
    std::string out = "evaluate";
    std::size_t k = 10;
    std::vector<std::string> models;
    std::vector<std::string> targets;
    double kkt_tolerance = 1e-3;
    std::size_t max_epochs = 1000;
    unsigned threads = 0;
    std::optional<std::uint64_t> seed;
};

const std::vector<std::string> kDefaultModels{"SVR-Linear:linear:1.0:0.031",
                                              "SVR-RBF:rbf:0.13:0.00097:1.0"};

// NAME:linear:C:EPS or NAME:rbf:C:EPS:GAMMA
modelsel::NamedConfig parse_model_spec(const std::string& text, const svr::TrainConfig& base) {
    std::vector<std::string> parts;
    std::stringstream ss(text);
    for (std::string part; std::getline(ss, part, ':');) parts.push_back(part);
    const bool linear = parts.size() == 4 && parts[1] == "linear";
    const bool rbf = parts.size() == 5 && parts[1] == "rbf";
    if (!linear && !rbf) {
        throw UsageError("bad --model '" + text + "' (NAME:linear:C:EPS or NAME:rbf:C:EPS:GAMMA)");
    }
    try {
        svr::TrainConfig cfg = base;
        cfg.c = std::stod(parts[2]);
        cfg.epsilon = std::stod(parts[3]);
        if (rbf) cfg.kernel = svr::KernelSpec::rbf(std::stod(parts[4]));
        cfg.validate();
        return {parts[0], cfg};
    } catch (const std::logic_error&) {
        throw UsageError("bad number in --model '" + text + "'");
    }
}

void run_evaluate(EvaluateArgs& a) {
    const std::uint64_t seed = resolve_seed(a.seed);
    if (a.models.empty()) a.models = kDefaultModels;
    if (a.targets.empty()) a.targets = {"x", "y", "angle"};
    svr::TrainConfig base;
    base.kkt_tolerance = a.kkt_tolerance;
    base.max_epochs = a.max_epochs;
    base.seed = seed;
    std::vector<modelsel::NamedConfig> configs;
    for (const auto& m : a.models) configs.push_back(parse_model_spec(m, base));
    std::vector<domain::Target> targets;
    std::vector<std::string> target_names;
    for (const auto& t : a.targets) {
        targets.push_back(resolve_target(t));
        target_names.emplace_back(domain::target_name(targets.back()));
    }

    const auto rows = load_features(a.features);
    const auto report = modelsel::evaluate_models(rows, configs, targets, a.k, seed, a.threads);
    const fs::path dir(a.out);
    io::write_text_file(dir / "report.csv", report.csv());
    io::write_text_file(dir / "report.txt", report.text_table());

    ConfigEcho e("evaluate");
    e.add("features", a.features);
    e.add("k", static_cast<std::uint64_t>(a.k));
    e.add_list("model", a.models);
    e.add_list("target", target_names);
    e.add("kkt-tolerance", a.kkt_tolerance);
    e.add("max-epochs", static_cast<std::uint64_t>(a.max_epochs));
    e.add("seed", seed);
    e.add("out", a.out);
    e.write(dir / "evaluate.config.json");

    for (const auto& r : report.rows) {
        if (r.not_converged > 0) {
            std::cerr << kProgram << ": warning: " << r.model << "/"
                      << domain::target_name(r.target) << ": " << r.not_converged
                      << " folds hit the epoch limit\n";
        }
    }
    std::cout << report.text_table();
}

// ---------------------------------------------------------------------------
// sweep-k

struct SweepArgs {
    std::string features;
    std::string target = "x";
    std::string out = "sweep_k.csv";
    std::size_t k_min = 2;
    std::size_t k_max = 20;
    unsigned threads = 0;
    std::optional<std::uint64_t> seed;
    ModelFlags model;
};

void run_sweep(const SweepArgs& a) {
    if (a.k_min > a.k_max) {
        throw UsageError("--k-min (" + std::to_string(a.k_min) + ") exceeds --k-max (" +
                         std::to_string(a.k_max) + ")");
    }
    const domain::Target target = resolve_target(a.target);
    const std::uint64_t seed = resolve_seed(a.seed);
    const svr::TrainConfig cfg = a.model.config(seed);
    const auto rows = load_features(a.features);
    const auto data = modelsel::make_dataset(rows, target);
    std::vector<std::size_t> ks;
    for (std::size_t k = a.k_min; k <= a.k_max; ++k) ks.push_back(k);
    const auto points = modelsel::k_sweep(cfg, data, ks, seed, a.threads);

    std::string csv = "k,rmse\n";
    for (const auto& p : points) {
        const std::array<std::string, 2> fields{std::to_string(p.k), io::format_number(p.mean_rmse)};
        csv += io::csv_line(fields);
    }
    const fs::path out(a.out);
    io::write_text_file(out, csv);

    ConfigEcho e("sweep-k");
    e.add("features", a.features);
    e.add("target", std::string(domain::target_name(target)));
    e.add("k-min", static_cast<std::uint64_t>(a.k_min));
    e.add("k-max", static_cast<std::uint64_t>(a.k_max));
    a.model.echo(e);
    e.add("seed", seed);
    e.add("out", a.out);
    e.write(sidecar(out, ".config.json"));
    std::cout << "wrote " << points.size() << " points to " << out.string() << "\n";
}

// ---------------------------------------------------------------------------
// summarize

struct SummarizeArgs {
    std::string features;
    std::string spec = "C0402";
    std::string out = "summary.csv";
};

void run_summarize(const SummarizeArgs& a) {
    const auto* spec = domain::find_spec(domain::builtin_specs(), a.spec);
    if (spec == nullptr) {
        throw UsageError("--spec must name one component type, got '" + a.spec + "'");
    }
    const auto rows = filter_spec(load_features(a.features), a.spec);
    const auto summary = domain::shift_summary(rows, *spec);

    std::string csv =
        "setting,x_avg_um,x_std_um,x_min_um,x_max_um,y_avg_um,y_std_um,y_min_um,y_max_um,"
        "angle_avg_deg,angle_std_deg,angle_min_deg,angle_max_deg,count\n";
    for (const auto& s : summary) {
        std::vector<std::string> fields{std::to_string(s.setting_id)};
        for (const auto* d : {&s.x_um, &s.y_um, &s.angle_deg}) {
            fields.push_back(io::format_number(d->avg));
            fields.push_back(io::format_number(d->std));
            fields.push_back(io::format_number(d->min));
            fields.push_back(io::format_number(d->max));
        }
        fields.push_back(std::to_string(s.count));
        csv += io::csv_line(fields);
    }
    const fs::path out(a.out);
    io::write_text_file(out, csv);

    ConfigEcho e("summarize");
    e.add("features", a.features);
    e.add("spec", a.spec);
    e.add("out", a.out);
    e.write(sidecar(out, ".config.json"));
    std::cout << "wrote " << summary.size() << " settings to " << out.string() << "\n";
}

// ---------------------------------------------------------------------------
// predict

struct PredictArgs {
    std::string model;
    std::string features;
    std::string out = "predictions.csv";
};

void run_predict(const PredictArgs& a) {
    const auto file = svr::load_model(a.model);
    const auto expected = feature_names();
    if (file.feature_names != expected || file.model.dimension() != expected.size()) {
        throw Error(ErrorKind::DimensionMismatch,
                    "model expects features [" + join_names(file.feature_names) +
                        "] but feature files carry [" + join_names(expected) + "]");
    }
    const auto table = io::read_csv_file(a.features);
    if (!table.header().empty()) {
        for (const auto& name : expected) {
            if (!table.has_column(name)) {
                throw Error(ErrorKind::DimensionMismatch,
                            a.features + " lacks column '" + name + "'; model expects [" +
                                join_names(expected) + "]");
            }
        }
    }
    const auto rows = domain::read_features(table, false);
    Matrix xs(rows.size(), domain::kFeatureCount);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        std::copy(rows[i].x.begin(), rows[i].x.end(), xs.row(i).begin());
    }
    const auto predicted = file.model.predict(xs);

    std::string csv = "board_id,component_id,setting_id,spec_name," + file.target_name + "\n";
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const std::array<std::string, 5> fields{rows[i].board_id, rows[i].component_id,
                                                std::to_string(rows[i].setting_id),
                                                rows[i].spec_name, io::format_number(predicted[i])};
        csv += io::csv_line(fields);
    }
    const fs::path out(a.out);
    io::write_text_file(out, csv);

    ConfigEcho e("predict");
    e.add("model", a.model);
    e.add("features", a.features);
    e.add("out", a.out);
    e.write(sidecar(out, ".config.json"));
    if (!file.converged) {
        std::cerr << kProgram << ": warning: " << a.model << " is flagged as not converged\n";
    }
    std::cout << "wrote " << rows.size() << " predictions to " << out.string() << "\n";
}

// ---------------------------------------------------------------------------
// oracle-solve (hidden): reference dual solution for small feature files

struct OracleArgs {
    std::string features;
    std::string target = "x";
    std::string out = "oracle.json";
    std::optional<std::uint64_t> seed;
    ModelFlags model;
};

void run_oracle(const OracleArgs& a) {
    const domain::Target target = resolve_target(a.target);
    const std::uint64_t seed = resolve_seed(a.seed);
    const svr::TrainConfig cfg = a.model.config(seed);
    const auto data = modelsel::make_dataset(load_features(a.features), target);
    const auto sol = oracle::qp_reference_solve(cfg, data.xs, data.ys);
    const auto smo = svr::train(cfg, data.xs, data.ys);

    ordered_json j;
    j["rows"] = data.ys.size();
    j["oracle_objective"] = sol.dual_objective;
    j["oracle_bias"] = sol.bias;
    j["oracle_betas"] = sol.betas;
    j["oracle_iterations"] = sol.iterations;
    j["smo_objective"] = smo.stats.dual_objective;
    j["smo_betas"] = smo.stats.betas;
    const fs::path out(a.out);
    io::write_text_file(out, j.dump(2) + "\n");

    ConfigEcho e("oracle-solve");
    e.add("features", a.features);
    e.add("target", std::string(domain::target_name(target)));
    a.model.echo(e);
    e.add("seed", seed);
    e.add("out", a.out);
    e.write(sidecar(out, ".config.json"));
    std::cout << "oracle objective " << sol.dual_objective << ", smo objective "
              << smo.stats.dual_objective << "\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Component-shift prediction on SPI/AOI data with epsilon-SVR", kProgram};
    app.require_subcommand(1);
    app.set_version_flag("--version", "shiftcast 0.1.0");

    GenerateArgs gen;
    auto* generate = app.add_subcommand("generate", "Write synthetic SPI/AOI/truth data");
    generate->add_option("--out", gen.out, "Output directory")->capture_default_str();
    generate->add_option("--mode", gen.mode, "Ground-truth form")
        ->check(CLI::IsMember({"linear", "nonlinear"}))
        ->capture_default_str();
    generate->add_option("--replications", gen.replications, "Placements per setting and type")
        ->capture_default_str();
    generate->add_option("--seed", gen.seed, "Master seed (default: $SHIFTCAST_SEED or 0)");
    generate->add_option("--noise-x", gen.base.noise_std[0], "Shift X noise std (ratio)")
        ->capture_default_str();
    generate->add_option("--noise-y", gen.base.noise_std[1], "Shift Y noise std (ratio)")
        ->capture_default_str();
    generate->add_option("--noise-angle", gen.base.noise_std[2], "Shift angle noise std (deg)")
        ->capture_default_str();
    generate->add_option("--spi-offset-std", gen.base.spi_offset_std_um, "Paste offset std (um)")
        ->capture_default_str();
    generate->add_option("--spi-angle-std", gen.base.spi_angle_std_deg, "Paste angle std (deg)")
        ->capture_default_str();
    generate->add_option("--spi-volume-std", gen.base.spi_volume_std_pct, "Paste volume std (pp)")
        ->capture_default_str();
    generate->add_flag("--noiseless", gen.noiseless, "Zero every noise std");

    FeaturizeArgs feat;
    auto* featurize = app.add_subcommand("featurize", "Join SPI and AOI files into feature rows");
    featurize->add_option("--spi", feat.spi, "SPI deposit CSV")->required();
    featurize->add_option("--aoi", feat.aoi, "AOI placement CSV")->required();
    featurize->add_option("--out", feat.out, "Feature CSV to write")->required();
    featurize->add_option("--spec", feat.spec, "Component type to keep, or 'all'")
        ->capture_default_str();

    TrainArgs tr;
    auto* train = app.add_subcommand("train", "Fit one SVR model");
    train->add_option("--features", tr.features, "Feature CSV")->required();
    train->add_option("--target", tr.target, "x, y or angle")->required();
    train->add_option("--model-out", tr.model_out, "Model JSON to write")->required();
    train->add_option("--seed", tr.seed, "Recorded seed (default: $SHIFTCAST_SEED or 0)");
    tr.model.attach(train);

    TuneArgs tu;
    auto* tune = app.add_subcommand("tune", "Grid search with k-fold cross-validation");
    tune->add_option("--features", tu.features, "Feature CSV")->required();
    tune->add_option("--target", tu.target, "x, y or angle")->required();
    tune->add_option("--kernel", tu.kernel, "linear or rbf")
        ->check(CLI::IsMember({"linear", "rbf"}))
        ->capture_default_str();
    tune->add_option("--k", tu.k, "Folds")->capture_default_str();
    tune->add_option("--cs", tu.cs, "C values (default grid if omitted)");
    tune->add_option("--epsilons", tu.epsilons, "Epsilon values (default grid if omitted)");
    tune->add_option("--gammas", tu.gammas, "Gamma values, rbf only (default grid if omitted)");
    tune->add_option("--kkt-tolerance", tu.kkt_tolerance, "Solver tolerance")->capture_default_str();
    tune->add_option("--max-epochs", tu.max_epochs, "Solver epoch limit")->capture_default_str();
    tune->add_option("--threads", tu.threads, "Worker threads (0 = all cores)")->capture_default_str();
    tune->add_option("--seed", tu.seed, "Fold seed (default: $SHIFTCAST_SEED or 0)");
    tune->add_option("--out", tu.out, "Output directory")->capture_default_str();

    EvaluateArgs ev;
    auto* evaluate = app.add_subcommand("evaluate", "Cross-validated MAE/RMSE report");
    evaluate->add_option("--features", ev.features, "Feature CSV")->required();
    evaluate->add_option("--k", ev.k, "Folds")->capture_default_str();
    evaluate->add_option("--model", ev.models,
                         "NAME:linear:C:EPS or NAME:rbf:C:EPS:GAMMA (repeatable; default: "
                         "SVR-Linear C=1 eps=0.031, SVR-RBF C=0.13 eps=0.00097 gamma=1)");
    evaluate->add_option("--target", ev.targets, "Targets (repeatable; default x, y, angle)");
    evaluate->add_option("--kkt-tolerance", ev.kkt_tolerance, "Solver tolerance")
        ->capture_default_str();
    evaluate->add_option("--max-epochs", ev.max_epochs, "Solver epoch limit")->capture_default_str();
    evaluate->add_option("--threads", ev.threads, "Worker threads (0 = all cores)")
        ->capture_default_str();
    evaluate->add_option("--seed", ev.seed, "Fold seed (default: $SHIFTCAST_SEED or 0)");
    evaluate->add_option("--out", ev.out, "Output directory")->capture_default_str();

    SweepArgs sw;
    auto* sweep = app.add_subcommand("sweep-k", "Cross-validated RMSE across k");
    sweep->add_option("--features", sw.features, "Feature CSV")->required();
    sweep->add_option("--target", sw.target, "x, y or angle")->capture_default_str();
    sweep->add_option("--k-min", sw.k_min, "Smallest k")->capture_default_str();
    sweep->add_option("--k-max", sw.k_max, "Largest k")->capture_default_str();
    sweep->add_option("--threads", sw.threads, "Worker threads (0 = all cores)")
        ->capture_default_str();
    sweep->add_option("--seed", sw.seed, "Fold seed (default: $SHIFTCAST_SEED or 0)");
    sweep->add_option("--out", sw.out, "CSV to write")->capture_default_str();
    sw.model.attach(sweep);

    SummarizeArgs su;
    auto* summarize = app.add_subcommand("summarize", "Per-setting shift statistics");
    summarize->add_option("--features", su.features, "Feature CSV")->required();
    summarize->add_option("--spec", su.spec, "Component type")->capture_default_str();
    summarize->add_option("--out", su.out, "CSV to write")->capture_default_str();

    PredictArgs pr;
    auto* predict = app.add_subcommand("predict", "Apply a saved model");
    predict->add_option("--model", pr.model, "Model JSON")->required();
    predict->add_option("--features", pr.features, "Feature CSV")->required();
    predict->add_option("--out", pr.out, "CSV to write")->capture_default_str();

    OracleArgs orc;
    auto* oracle_cmd = app.add_subcommand("oracle-solve", "");  // hidden
    oracle_cmd->group("");
    oracle_cmd->add_option("--features", orc.features, "Feature CSV (at most 64 rows)")->required();
    oracle_cmd->add_option("--target", orc.target, "x, y or angle")->capture_default_str();
    oracle_cmd->add_option("--seed", orc.seed, "Oracle start seed");
    oracle_cmd->add_option("--out", orc.out, "JSON to write")->capture_default_str();
    orc.model.attach(oracle_cmd);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (*generate) run_generate(gen);
        if (*featurize) run_featurize(feat);
        if (*train) run_train(tr);
        if (*tune) run_tune(tu);
        if (*evaluate) run_evaluate(ev);
        if (*sweep) run_sweep(sw);
        if (*summarize) run_summarize(su);
        if (*predict) run_predict(pr);
        if (*oracle_cmd) run_oracle(orc);
    } catch (const UsageError& e) {
        std::cerr << kProgram << ": usage error: " << e.what() << "\n";
        return kUsageError;
    } catch (const std::exception& e) {
        std::cerr << kProgram << ": error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
