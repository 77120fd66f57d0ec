// SPDX-License-Identifier: Apache-2.0
#include "splitcomp/codec/entropy_model_io.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace splitcomp::codec {

using nlohmann::json;

std::string entropy_model_to_json(const EntropyModel& model) {
    json j;
    j["id"] = model.id;
    j["min_symbol"] = model.min_symbol;
    j["max_symbol"] = model.max_symbol;
    j["precision"] = model.precision;
    j["tail_mass"] = model.tail_mass;
    j["loc"] = std::vector<double>(model.loc.begin(), model.loc.end());
    j["log_scale"] = std::vector<double>(model.log_scale.begin(), model.log_scale.end());
    return j.dump(2) + "\n";
}

EntropyModel entropy_model_from_json(const std::string& text) {
    EntropyModel m;
    try {
        const json j = json::parse(text);
        m.id = j.at("id").get<std::uint16_t>();
        m.min_symbol = j.value("min_symbol", m.min_symbol);
        m.max_symbol = j.value("max_symbol", m.max_symbol);
        m.precision = j.value("precision", m.precision);
        m.tail_mass = j.value("tail_mass", m.tail_mass);
        const auto loc = j.at("loc").get<std::vector<double>>();
        const auto log_scale = j.at("log_scale").get<std::vector<double>>();
        m.loc = Eigen::Map<const Eigen::VectorXd>(loc.data(), static_cast<Index>(loc.size()));
        m.log_scale = Eigen::Map<const Eigen::VectorXd>(log_scale.data(), static_cast<Index>(log_scale.size()));
    } catch (const json::exception& e) {
        throw FormatError(std::string("entropy model: ") + e.what());
    }
    m.validate();
    return m;
}

EntropyModel load_entropy_model(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read entropy model " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return entropy_model_from_json(ss.str());
}

void save_entropy_model(const EntropyModel& model, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write entropy model " + path.string());
    out << entropy_model_to_json(model);
    if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace splitcomp::codec
