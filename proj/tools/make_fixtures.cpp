// SPDX-License-Identifier: Apache-2.0
// Regenerates fixtures/ from the built-in definitions:
//   make_fixtures <fixtures-dir>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "splitcomp/bench/scenarios.hpp"
#include "splitcomp/codec/entropy_model_io.hpp"
#include "splitcomp/codec/fit.hpp"
#include "splitcomp/cost/profiles.hpp"
#include "splitcomp/model/split_model.hpp"

using namespace splitcomp;

namespace {

void write(const std::filesystem::path& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    f << text;
    if (!text.empty() && text.back() != '\n') f << '\n';
    if (!f) throw IoError("cannot write " + path.string());
    std::cout << "wrote " << path.string() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
    if (argc != 2) {
        std::cerr << "usage: make_fixtures <fixtures-dir>\n";
        return 2;
    }
    const std::filesystem::path dir = argv[1];
    try {
        std::filesystem::create_directories(dir);
        const cost::ProfileSet all = cost::builtin_profiles();
        for (const auto& [name, device] : all.devices) {
            cost::ProfileSet one;
            one.devices.emplace(name, device);
            write(dir / (name + ".json"), cost::profiles_to_json(one));
        }
        cost::ProfileSet channels;
        channels.channels = all.channels;
        write(dir / "channels.json", cost::profiles_to_json(channels));

        write(dir / "scenarios.json",
              bench::scenario_to_json({bench::enumerate_configs(), bench::default_fixtures()}));

        const model::ModelDefinition def = model::ModelDefinition::toy();
        write(dir / "toy_model.json", model::model_definition_to_json(def));

        // Same recipe as `splitcomp fit` with its defaults.
        const model::SplitModel m(def);
        std::vector<Tensor> latents;
        for (std::uint64_t s = 0; s < 8; ++s) {
            latents.push_back(m.encode(model::preprocess(model::synthetic_image(100 + s, 64, 64), m.input_shape())));
        }
        codec::FitOptions opts;
        opts.id = m.entropy_model_id();
        write(dir / "toy_entropy.json",
              codec::entropy_model_to_json(codec::fit_entropy_model(latents, m.latent_channels(), 200, 0.5, opts)));
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
