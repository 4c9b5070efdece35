#include <CLI11.hpp>

#include <exception>
#include <iostream>
#include <optional>
#include <string>

#include "fracback/expcli.hpp"

int main(int argc, char** argv) {
    using namespace fracback;
    CLI::App app{"Forward and backward time-fractional diffusion experiments"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    std::optional<std::uint64_t> seed;
    std::optional<int> modes;

    const std::pair<const char*, const char*> subs[] = {
        {"evolve", "forward solution: trajectory.csv and summary.json"},
        {"backcast", "noisy reconstruction: reconstruction.json and errors.csv"},
        {"certify", "stability certificates: certificate.json and certificate.txt"},
        {"amplification", "per-mode amplification factors: amplification.csv"}};
    for (const auto& [name, help] : subs) {
        auto* sub = app.add_subcommand(name, help);
        sub->add_option("--config", config_path, "experiment config JSON")->required();
        sub->add_option("--out", out_dir, "output directory (default: config 'outputs', else ./out)");
        sub->add_option("--seed", seed, "override the initial-state and noise seeds");
        sub->add_option("--modes", modes, "override the mode truncation");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : expcli::kConfigError;
    }

    expcli::Command cmd = expcli::Command::evolve;
    for (auto* sub : app.get_subcommands()) {
        const std::string n = sub->get_name();
        if (n == "backcast") cmd = expcli::Command::backcast;
        if (n == "certify") cmd = expcli::Command::certify;
        if (n == "amplification") cmd = expcli::Command::amplification;
    }

    try {
        auto cfg = expcli::load_config(config_path);
        expcli::Overrides ov;
        if (!out_dir.empty()) ov.out = out_dir;
        ov.seed = seed;
        ov.modes = modes;
        expcli::apply_overrides(cfg, ov);
        return expcli::run(cmd, cfg);
    } catch (const std::exception& e) {
        const int code = expcli::classify(e);
        expcli::log(expcli::LogLevel::error, std::string(code == expcli::kConfigError ? "config error: " : "numeric error: ") + e.what());
        return code;
    }
}
