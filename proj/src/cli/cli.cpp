// SPDX-License-Identifier: Apache-2.0
#include "splitcomp/cli.hpp"

#include <atomic>
#include <chrono>
#include <csignal>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "splitcomp/bench/plan.hpp"
#include "splitcomp/bench/report.hpp"
#include "splitcomp/bench/scenarios.hpp"
#include "splitcomp/codec/bitstream.hpp"
#include "splitcomp/codec/entropy_model_io.hpp"
#include "splitcomp/codec/fit.hpp"
#include "splitcomp/codec/symbol_file.hpp"
#include "splitcomp/cost/profiles.hpp"
#include "splitcomp/error.hpp"
#include "splitcomp/model/split_model.hpp"
#include "splitcomp/net/client.hpp"
#include "splitcomp/net/server.hpp"

#ifndef SPLITCOMP_VERSION
#define SPLITCOMP_VERSION "0.0.0"
#endif

namespace splitcomp::cli {
namespace {

using nlohmann::json;

std::atomic<bool> g_stop{false};

extern "C" void on_signal(int) { g_stop.store(true); }

model::ModelDefinition model_definition(const std::string& path) {
    return path.empty() ? model::ModelDefinition::toy() : model::load_model_definition(path);
}

// Binary PPM (P6, maxval 255) to a [3,H,W] tensor of 0..255 values.
Tensor read_ppm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read image " + path);
    auto token = [&in] {
        std::string t;
        while (in >> t) {
            if (t[0] != '#') return t;
            std::string rest;
            std::getline(in, rest);
        }
        throw FormatError("image: truncated PPM header");
    };
    if (token() != "P6") throw FormatError("image: only binary PPM (P6) is supported");
    Index w = 0, h = 0;
    int maxval = 0;
    try {
        w = std::stol(token());
        h = std::stol(token());
        maxval = std::stoi(token());
    } catch (const std::logic_error&) {
        throw FormatError("image: bad PPM header");
    }
    if (w <= 0 || h <= 0 || maxval != 255) throw FormatError("image: need positive size and maxval 255");
    in.get();
    std::vector<unsigned char> px(static_cast<std::size_t>(3 * w * h));
    if (!in.read(reinterpret_cast<char*>(px.data()), static_cast<std::streamsize>(px.size())))
        throw FormatError("image: truncated PPM data");
    Tensor img({3, h, w});
    for (Index y = 0; y < h; ++y)
        for (Index x = 0; x < w; ++x)
            for (Index c = 0; c < 3; ++c) img(c, y, x) = px[static_cast<std::size_t>(3 * (y * w + x) + c)];
    return img;
}

struct ImageSource {
    std::string path;
    std::uint64_t seed = 0;
    Index side = 0;  // 0: model input size

    void add_options(CLI::App* app) {
        app->add_option("--image", path, "Binary PPM (P6) input image; a synthetic image is used when absent");
        app->add_option("--seed", seed, "Seed of the synthetic image")->capture_default_str();
        app->add_option("--side", side, "Side of the synthetic image in pixels (0: model input size)")
            ->capture_default_str();
    }

    Tensor load(const model::SplitModel& m) const {
        if (!path.empty()) return read_ppm(path);
        const Index h = side > 0 ? side : m.input_shape()[1];
        const Index w = side > 0 ? side : m.input_shape()[2];
        return model::synthetic_image(seed, h, w);
    }
};

model::TaskSet parse_tasks(const std::vector<std::string>& names) {
    model::TaskSet set;
    std::uint8_t mask = 0;
    for (const auto& n : names) mask |= model::TaskSet({model::parse_task(n)}).mask();
    set = model::TaskSet::from_mask(mask);
    if (set.empty()) throw TaskError("no tasks requested");
    return set;
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    if (!f || !(f << text)) throw IoError("cannot write " + path);
}

// ---------------------------------------------------------------- encode

struct EncodeArgs {
    std::string entropy, in, out, model, symbols_out;
    ImageSource image;
};

void cmd_encode(const EncodeArgs& a, std::ostream& out) {
    const codec::EntropyModel em = codec::load_entropy_model(a.entropy);
    Tensor symbols;
    if (!a.in.empty()) {
        symbols = codec::parse_symbols(codec::read_file(a.in));
    } else {
        const model::SplitModel m(model_definition(a.model));
        symbols = m.encode(model::preprocess(a.image.load(m), m.input_shape()));
        if (!a.symbols_out.empty()) codec::write_file(a.symbols_out, codec::serialize_symbols(symbols));
    }
    const auto bytes = codec::encode_latent(symbols, em).serialize();
    codec::write_file(a.out, bytes);
    out << "wrote " << bytes.size() << " bytes to " << a.out << "\n";
}

// ---------------------------------------------------------------- decode

struct DecodeArgs {
    std::string entropy, in, out;
};

void cmd_decode(const DecodeArgs& a, std::ostream& out) {
    const codec::EntropyModel em = codec::load_entropy_model(a.entropy);
    const auto stream = codec::Bitstream::parse(codec::read_file(a.in));
    const auto bytes = codec::serialize_symbols(codec::decode_latent(stream, em));
    codec::write_file(a.out, bytes);
    out << "wrote " << bytes.size() << " bytes to " << a.out << "\n";
}

// ---------------------------------------------------------------- fit

struct FitArgs {
    std::string out, model;
    std::vector<std::string> symbols;
    int images = 8;
    int steps = 200;
    double lr = 0.5;
    std::uint64_t seed = 0;
    int id = -1;
};

void cmd_fit(const FitArgs& a, std::ostream& out) {
    std::vector<Tensor> latents;
    Index channels = 0;
    std::uint16_t id = 0;
    if (!a.symbols.empty()) {
        for (const auto& f : a.symbols) latents.push_back(codec::parse_symbols(codec::read_file(f)));
        channels = latents.front().shape()[0];
    } else {
        const model::SplitModel m(model_definition(a.model));
        for (int i = 0; i < a.images; ++i) {
            const auto img = model::synthetic_image(a.seed + 100 + static_cast<std::uint64_t>(i), m.input_shape()[1],
                                                    m.input_shape()[2]);
            latents.push_back(m.encode(model::preprocess(img, m.input_shape())));
        }
        channels = m.latent_channels();
        id = m.entropy_model_id();
    }
    codec::FitOptions opts;
    opts.id = a.id >= 0 ? static_cast<std::uint16_t>(a.id) : id;
    codec::FitReport rep;
    const auto em = codec::fit_entropy_model(latents, channels, a.steps, a.lr, opts, &rep);
    codec::save_entropy_model(em, a.out);
    out << "nll bits/symbol " << rep.initial_nll_bits << " -> " << rep.final_nll_bits << "; wrote " << a.out << "\n";
}

// ---------------------------------------------------------------- bench

struct BenchArgs {
    std::string profiles, mobile = "jetson_nano", server = "laptop", channel = "100kbps";
    bool mobile_cuda = false, server_cpu = false, single_encode = false;
    int warmup = 5, runs = 10;
    double sample_hz = 1000;
    std::string scenario, out, model, entropy;
    ImageSource image;
};

void cmd_bench(const BenchArgs& a, std::ostream& out) {
    const cost::ProfileSet profiles = a.profiles.empty() ? cost::builtin_profiles() : cost::load_profiles(a.profiles);
    bench::ScenarioFile sc;
    if (a.scenario.empty()) {
        sc.configs = bench::enumerate_configs();
        sc.fixtures = bench::default_fixtures();
    } else {
        sc = bench::load_scenario(a.scenario);
    }
    if (a.single_encode) sc.fixtures.sc_single_encode = true;

    if (!a.model.empty() || !a.entropy.empty()) {
        if (a.model.empty() || a.entropy.empty()) throw ConfigError("--model and --entropy go together");
        const model::SplitModel m(model_definition(a.model));
        const auto em = codec::load_entropy_model(a.entropy);
        const auto z = m.encode(model::preprocess(a.image.load(m), m.input_shape()));
        sc.fixtures.set_uniform_payload(static_cast<double>(codec::encode_latent(z, em).total_bytes()));
    }

    bench::EvalSetting setting;
    setting.mobile = profiles.device(a.mobile);
    setting.server = profiles.device(a.server);
    setting.channel = profiles.channel(a.channel);
    setting.mobile_mode = a.mobile_cuda ? cost::ComputeMode::Gpu : cost::ComputeMode::Cpu;
    setting.server_mode = a.server_cpu ? cost::ComputeMode::Cpu : cost::ComputeMode::Gpu;
    setting.measurement.warmup_runs = a.warmup;
    setting.measurement.measured_runs = a.runs;
    setting.measurement.sample_hz = a.sample_hz;

    const auto records = bench::run_all(sc.configs, sc.fixtures, setting);
    if (a.out.empty()) {
        out << bench::to_csv(records);
    } else {
        bench::report(records, a.out);
    }
}

// ---------------------------------------------------------------- serve

struct ServeArgs {
    std::string model, host = "127.0.0.1";
    std::vector<std::string> entropy;
    std::uint16_t port = 5600;
    std::uint32_t max_payload = 16u << 20;
    double idle_timeout = 60, duration = 0;
};

void cmd_serve(const ServeArgs& a, std::ostream& out) {
    codec::EntropyRegistry registry;
    for (const auto& f : a.entropy) {
        auto em = codec::load_entropy_model(f);
        const auto id = em.id;
        if (!registry.emplace(id, std::move(em)).second) throw ConfigError("duplicate entropy model id in " + f);
    }
    net::ServerOptions opts;
    opts.host = a.host;
    opts.port = a.port;
    opts.max_payload = a.max_payload;
    opts.idle_timeout_s = a.idle_timeout;
    auto server = net::serve(model::SplitModel(model_definition(a.model)), std::move(registry), opts);
    out << "listening on " << server->address() << std::endl;

    g_stop.store(false);
    auto prev_int = std::signal(SIGINT, on_signal);
    auto prev_term = std::signal(SIGTERM, on_signal);
    const auto start = std::chrono::steady_clock::now();
    while (!g_stop.load() && server->running()) {
        if (a.duration > 0 &&
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count() >= a.duration)
            break;
        std::this_thread::sleep_for(std::chrono::milliseconds(50));
    }
    std::signal(SIGINT, prev_int);
    std::signal(SIGTERM, prev_term);
    server->stop();
    const auto st = server->stats();
    out << "served " << st.responses << " responses, " << st.errors << " errors over " << st.connections
        << " connections" << std::endl;
}

// ---------------------------------------------------------------- client

struct ClientArgs {
    std::string server = "127.0.0.1:5600", model, entropy, channel = "100kbps", out;
    std::vector<std::string> tasks{"IC", "OD", "SS"};
    double timeout = 60, bucket_bits = net::RateShaper::kDefaultCapacityBits;
    bool no_shape = false, include_downlink = false, echo = false;
    ImageSource image;
};

json results_json(const net::ClientResult& r) {
    json j;
    if (r.results.classification) {
        j["classification"] = {{"label", r.results.classification->label},
                               {"score", r.results.classification->score}};
    }
    if (r.results.detections) {
        json dets = json::array();
        for (const auto& d : *r.results.detections) {
            dets.push_back({{"box", d.box}, {"score", d.score / 65535.0}});
        }
        j["detections"] = dets;
    }
    if (r.results.segmentation) {
        const auto& s = *r.results.segmentation;
        std::map<std::string, std::size_t> hist;
        for (auto c : s.classes) ++hist[std::to_string(c)];
        j["segmentation"] = {{"height", s.height}, {"width", s.width}, {"class_pixels", hist}};
    }
    if (r.results.echo) j["echo_matches_latent"] = *r.results.echo == r.latent;
    j["request_bytes"] = r.request_bytes;
    j["response_bytes"] = r.response_bytes;
    j["timing_s"] = {{"preprocess", r.timing.preprocess_s}, {"encode", r.timing.encode_s},
                     {"tx", r.timing.tx_s},                 {"downlink", r.timing.downlink_s},
                     {"round_trip", r.timing.round_trip_s}};
    return j;
}

void cmd_client(const ClientArgs& a, std::ostream& out) {
    const model::SplitModel m(model_definition(a.model));
    const auto em = codec::load_entropy_model(a.entropy);
    net::ClientOptions opts;
    opts.timeout_s = a.timeout;
    opts.rate_bps = cost::builtin_profiles().channel(a.channel).rate_bps;
    opts.bucket_bits = a.bucket_bits;
    opts.shape_uplink = !a.no_shape;
    opts.include_downlink = a.include_downlink;
    opts.echo = a.echo;
    const auto r = net::client_infer(a.server, a.image.load(m), parse_tasks(a.tasks), m, em, opts);
    const std::string text = results_json(r).dump(2) + "\n";
    if (a.out.empty()) {
        out << text;
    } else {
        write_text(a.out, text);
    }
}

// ---------------------------------------------------------------- app

CLI::Option* add_model_option(CLI::App* app, std::string& target) {
    return app->add_option("--model", target, "Model definition JSON (default: built-in toy model, seed 0)")
        ->check(CLI::ExistingFile);
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Split-computing toolkit: latent codec, cost model, scenario bench, client/server runtime",
                 "splitcomp"};
    app.require_subcommand(1);
    app.get_formatter()->column_width(40);
    app.set_help_all_flag("--help-all", "Help for every subcommand");

    EncodeArgs enc;
    auto* encode = app.add_subcommand("encode", "Entropy-code a symbol file, or the latent of an image");
    encode->add_option("--entropy", enc.entropy, "Entropy model JSON")->required()->check(CLI::ExistingFile);
    encode->add_option("--out", enc.out, "Output bitstream file")->required();
    auto* enc_in = encode->add_option("--in", enc.in, "Input symbol file (SYM1)")->check(CLI::ExistingFile);
    add_model_option(encode, enc.model)->excludes(enc_in);
    encode->add_option("--symbols-out", enc.symbols_out, "Also write the quantized latent as a symbol file")
        ->excludes(enc_in);
    enc.image.add_options(encode);

    DecodeArgs dec;
    auto* decode = app.add_subcommand("decode", "Decode a bitstream back to a symbol file");
    decode->add_option("--entropy", dec.entropy, "Entropy model JSON")->required()->check(CLI::ExistingFile);
    decode->add_option("--in", dec.in, "Input bitstream file")->required()->check(CLI::ExistingFile);
    decode->add_option("--out", dec.out, "Output symbol file")->required();

    FitArgs fit;
    auto* fitc = app.add_subcommand("fit", "Fit an entropy model to latents");
    fitc->add_option("--out", fit.out, "Output entropy model JSON")->required();
    add_model_option(fitc, fit.model);
    fitc->add_option("--symbols", fit.symbols, "Fit to these symbol files instead of model latents")
        ->check(CLI::ExistingFile);
    fitc->add_option("--images", fit.images, "Synthetic images encoded for fitting")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    fitc->add_option("--steps", fit.steps, "Gradient steps")->capture_default_str()->check(CLI::NonNegativeNumber);
    fitc->add_option("--lr", fit.lr, "Step size")->capture_default_str()->check(CLI::PositiveNumber);
    fitc->add_option("--seed", fit.seed, "Seed offset of the synthetic images")->capture_default_str();
    fitc->add_option("--id", fit.id, "Entropy model id (default: the model's id, or 0 with --symbols)")
        ->check(CLI::Range(0, 65535));

    BenchArgs b;
    auto* benchc = app.add_subcommand("bench", "Evaluate the LC/SC/Ours scenario matrix and write CSV");
    benchc->add_option("--profiles", b.profiles, "Profile JSON file or directory (default: built-in roster)")
        ->check(CLI::ExistingPath);
    benchc->add_option("--mobile", b.mobile, "Mobile device profile")->capture_default_str();
    benchc->add_option("--server", b.server, "Edge server device profile")->capture_default_str();
    benchc->add_option("--channel", b.channel, "Channel profile name or rate such as 37.5kbps")
        ->capture_default_str();
    benchc->add_flag("--mobile-cuda", b.mobile_cuda, "Run mobile stages at GPU throughput");
    auto* server_gpu = benchc->add_flag("--server-cuda", "Run server stages at GPU throughput (the default)");
    benchc->add_flag("--no-server-cuda", b.server_cpu, "Run server stages at CPU throughput")->excludes(server_gpu);
    benchc->add_flag("--single-encode", b.single_encode, "SC encodes once and sends three payloads");
    benchc->add_option("--warmup", b.warmup, "Warm-up runs discarded from energy")
        ->capture_default_str()
        ->check(CLI::NonNegativeNumber);
    benchc->add_option("--runs", b.runs, "Measured runs averaged for energy")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    benchc->add_option("--sample-hz", b.sample_hz, "Power sampling rate")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    benchc->add_option("--scenario", b.scenario, "Scenario JSON with configs and fixtures")
        ->check(CLI::ExistingFile);
    benchc->add_option("--out", b.out, "Output CSV (default: stdout)");
    add_model_option(benchc, b.model);
    benchc->add_option("--entropy", b.entropy, "With --model: take per-task payloads from the coded latent")
        ->check(CLI::ExistingFile);
    b.image.add_options(benchc);

    ServeArgs sv;
    auto* servec = app.add_subcommand("serve", "Run the edge server until interrupted");
    add_model_option(servec, sv.model);
    servec->add_option("--entropy", sv.entropy, "Entropy model JSON, repeatable; served by id")
        ->required()
        ->check(CLI::ExistingFile);
    servec->add_option("--host", sv.host, "Bind address")->capture_default_str();
    servec->add_option("--port", sv.port, "Bind port (0 picks a free port)")->capture_default_str();
    servec->add_option("--max-payload", sv.max_payload, "Largest accepted frame payload in bytes")
        ->capture_default_str();
    servec->add_option("--idle-timeout", sv.idle_timeout, "Seconds a connection may sit idle")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    servec->add_option("--duration", sv.duration, "Stop after this many seconds (0: run until signalled)")
        ->capture_default_str()
        ->check(CLI::NonNegativeNumber);

    ClientArgs cl;
    auto* clientc = app.add_subcommand("client", "Encode an image, send it over a shaped link, print results");
    clientc->add_option("--server", cl.server, "Server address host:port")->capture_default_str();
    add_model_option(clientc, cl.model);
    clientc->add_option("--entropy", cl.entropy, "Entropy model JSON")->required()->check(CLI::ExistingFile);
    clientc->add_option("--tasks", cl.tasks, "Tasks to run (IC, OD, SS)")->capture_default_str()->delimiter(',');
    clientc->add_option("--channel", cl.channel, "Uplink rate: channel name or rate such as 37.5kbps")
        ->capture_default_str();
    clientc->add_option("--bucket-bits", cl.bucket_bits, "Token bucket capacity in bits")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    clientc->add_flag("--no-shape", cl.no_shape, "Send the uplink unshaped");
    clientc->add_flag("--include-downlink", cl.include_downlink, "Also shape the response at the channel rate");
    clientc->add_flag("--echo", cl.echo, "Ask the server to return the decoded latent and compare it");
    clientc->add_option("--timeout", cl.timeout, "Seconds before giving up")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    clientc->add_option("--out", cl.out, "Write the JSON result here instead of stdout");
    cl.image.add_options(clientc);

    app.add_subcommand("version", "Print version information");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        err << app.help();
        return kExitUsage;
    }

    try {
        if (*encode) {
            cmd_encode(enc, out);
        } else if (*decode) {
            cmd_decode(dec, out);
        } else if (*fitc) {
            cmd_fit(fit, out);
        } else if (*benchc) {
            cmd_bench(b, out);
        } else if (*servec) {
            cmd_serve(sv, out);
        } else if (*clientc) {
            cmd_client(cl, out);
        } else {
            out << "splitcomp " << SPLITCOMP_VERSION << " (bitstream v" << int(codec::Bitstream::kVersion)
                << ", wire LDN1)\n";
        }
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return kExitRuntime;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
    return kExitOk;
}

}  // namespace splitcomp::cli
