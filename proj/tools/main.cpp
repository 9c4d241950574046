#include <clocale>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "dichoteq/errors.hpp"
#include "dichoteq/pipelines.hpp"

namespace {

using dichoteq::PipelineResult;
using dichoteq::RunConfig;

struct CommonArgs {
    std::string config_path;
    std::string out_dir;
    long long seed = -1;
    std::string window;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--config", args.config_path, "path to the JSON run configuration")
        ->required();
    cmd->add_option("--out", args.out_dir, "output directory (overrides config)");
    cmd->add_option("--seed", args.seed, "sample seed (overrides config)");
    cmd->add_option("--window", args.window, "window override, as \"lo,hi\"");
}

RunConfig make_config(const CommonArgs& args) {
    std::ifstream in(args.config_path);
    if (!in) throw dichoteq::ConfigError("cannot open config file " + args.config_path);
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw dichoteq::ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!args.window.empty()) {
        const auto comma = args.window.find(',');
        if (comma == std::string::npos)
            throw dichoteq::ConfigError("--window expects \"lo,hi\"");
        try {
            doc["window"] = {std::stoi(args.window.substr(0, comma)),
                             std::stoi(args.window.substr(comma + 1))};
        } catch (const std::exception&) {
            throw dichoteq::ConfigError("--window expects integer bounds");
        }
    }
    RunConfig cfg = dichoteq::load_config(doc);
    if (args.seed >= 0) cfg.seed = static_cast<uint64_t>(args.seed);
    if (!args.out_dir.empty()) cfg.out_dir = args.out_dir;
    return cfg;
}

int run(const CommonArgs& args, PipelineResult (*pipeline)(const RunConfig&)) {
    try {
        const RunConfig cfg = make_config(args);
        const PipelineResult result = pipeline(cfg);
        dichoteq::write_outputs(result, cfg.out_dir);
        std::cout << result.summary.dump(2) << '\n';
        return result.exit_code;
    } catch (const dichoteq::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const dichoteq::InvalidParams& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const dichoteq::UnknownFamily& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const dichoteq::WindowTooNarrow& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const dichoteq::IndexOutOfWindow& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const dichoteq::NotAProjection& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const dichoteq::Error& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return 3;
    }
}

} // namespace

int main(int argc, char** argv) {
    std::setlocale(LC_NUMERIC, "C");
    CLI::App app{"certification and topological-equivalence toolkit for linear "
                 "difference systems with dichotomies"};
    app.require_subcommand(1);

    CommonArgs certify_args, bounded_args, verify_args, modulus_args;
    CLI::App* certify =
        app.add_subcommand("certify", "check dichotomy certificates and the contraction data");
    add_common(certify, certify_args);
    CLI::App* bounded =
        app.add_subcommand("bounded", "solve for bounded solutions with oracle cross-checks");
    add_common(bounded, bounded_args);
    CLI::App* verify =
        app.add_subcommand("verify", "build H and L and verify the equivalence properties");
    add_common(verify, verify_args);
    CLI::App* modulus =
        app.add_subcommand("modulus", "measure continuity moduli against the Holder envelope");
    add_common(modulus, modulus_args);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    if (certify->parsed()) return run(certify_args, dichoteq::run_certify);
    if (bounded->parsed()) return run(bounded_args, dichoteq::run_bounded);
    if (verify->parsed()) return run(verify_args, dichoteq::run_verify);
    return run(modulus_args, dichoteq::run_modulus);
}
