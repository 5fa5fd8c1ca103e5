#include "shiftcast/svr/model_io.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "shiftcast/error.hpp"
#include "shiftcast/io/csv.hpp"

namespace shiftcast::svr {

using nlohmann::ordered_json;

std::string model_to_json(const ModelFile& file) {
    const SvrModel& m = file.model;
    ordered_json j;
    j["format_version"] = kModelFormatVersion;
    ordered_json kernel;
    if (m.kernel().variant() == KernelVariant::Rbf) {
        kernel["variant"] = "rbf";
        kernel["gamma"] = m.kernel().gamma();
    } else {
        kernel["variant"] = "linear";
    }
    j["kernel"] = kernel;
    j["c"] = file.c;
    j["epsilon"] = file.epsilon;
    j["kkt_tolerance"] = file.kkt_tolerance;
    j["converged"] = file.converged;
    j["dimension"] = m.dimension();
    j["bias"] = m.bias();
    ordered_json svs = ordered_json::array();
    for (std::size_t r = 0; r < m.support_vectors().rows(); ++r) {
        const auto row = m.support_vectors().row(r);
        svs.push_back(std::vector<double>(row.begin(), row.end()));
    }
    j["support_vectors"] = svs;
    j["betas"] = std::vector<double>(m.betas().begin(), m.betas().end());
    j["feature_names"] = file.feature_names;
    j["target_name"] = file.target_name;
    return j.dump(2) + "\n";
}

ModelFile model_from_json(const std::string& text) {
    ordered_json j;
    try {
        j = ordered_json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::Schema, std::string("model file is not valid JSON: ") + e.what());
    }
    try {
        const int version = j.at("format_version").get<int>();
        if (version != kModelFormatVersion) {
            throw Error(ErrorKind::Schema,
                        "unsupported model format_version " + std::to_string(version));
        }
        const auto& k = j.at("kernel");
        const std::string variant = k.at("variant").get<std::string>();
        KernelSpec kernel;
        if (variant == "rbf") {
            kernel = KernelSpec::rbf(k.at("gamma").get<double>());
        } else if (variant != "linear") {
            throw Error(ErrorKind::Schema, "unknown kernel variant '" + variant + "'");
        }
        const auto dimension = j.at("dimension").get<std::size_t>();
        const auto betas = j.at("betas").get<std::vector<double>>();
        Matrix svs(0, dimension);
        for (const auto& row : j.at("support_vectors")) {
            svs.append_row(row.get<std::vector<double>>());
        }
        ModelFile file;
        file.model = SvrModel(kernel, dimension, std::move(svs), betas, j.at("bias").get<double>());
        file.c = j.at("c").get<double>();
        file.epsilon = j.at("epsilon").get<double>();
        file.kkt_tolerance = j.value("kkt_tolerance", 0.0);
        file.converged = j.value("converged", true);
        file.feature_names = j.at("feature_names").get<std::vector<std::string>>();
        file.target_name = j.at("target_name").get<std::string>();
        return file;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::Schema, std::string("malformed model file: ") + e.what());
    } catch (const std::invalid_argument& e) {
        throw Error(ErrorKind::Schema, std::string("malformed model file: ") + e.what());
    }
}

void save_model(const std::filesystem::path& path, const ModelFile& file) {
    io::write_text_file(path, model_to_json(file));
}

ModelFile load_model(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(ErrorKind::Io, "cannot open " + path.string());
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return model_from_json(buffer.str());
}

}  // namespace shiftcast::svr
