#pragma once

// Versioned JSON persistence for trained models. Numbers are written in the
// shortest form that parses back to the identical double, so a reloaded
// model predicts bit-identically.

#include <filesystem>
#include <string>
#include <vector>

#include "shiftcast/svr/svr.hpp"

namespace shiftcast::svr {

inline constexpr int kModelFormatVersion = 1;

struct ModelFile {
    SvrModel model;
    double c = 0.0;
    double epsilon = 0.0;
    double kkt_tolerance = 0.0;
    std::vector<std::string> feature_names;
    std::string target_name;
    bool converged = true;
};

std::string model_to_json(const ModelFile& file);
/// Throws Error(Schema) on malformed documents or unknown format versions.
ModelFile model_from_json(const std::string& text);

void save_model(const std::filesystem::path& path, const ModelFile& file);
ModelFile load_model(const std::filesystem::path& path);

}  // namespace shiftcast::svr
