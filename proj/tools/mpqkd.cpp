#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mpqkd/runner.hpp"

int main(int argc, char** argv) {
    CLI::App app{"mpqkd: key-rate engine for discrete-phase-randomized mode-pairing QKD"};
    app.require_subcommand(1);

    auto* run_cmd = app.add_subcommand("run", "Run a sweep or validation from a JSON config");
    std::string config_path;
    run_cmd->add_option("config", config_path, "JSON configuration file")->required();
    std::string mode;
    run_cmd->add_option("--mode", mode, "Override mode: sweep|mc_validate|decoy_validate");
    std::vector<std::string> overrides;
    run_cmd->add_option("--set", overrides, "Override a config key, e.g. channel.p_d=1e-7");
    int workers = 1;
    run_cmd->add_option("--workers", workers, "Worker threads for sweep evaluation")
        ->check(CLI::PositiveNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e); // --help
        app.exit(e);
        return mpqkd::cli::kExitConfig;
    }

    std::optional<mpqkd::cli::Mode> mode_flag;
    if (!mode.empty()) {
        try {
            mode_flag = mpqkd::cli::mode_from_string(mode);
        } catch (const std::exception& e) {
            std::cerr << "config error: " << e.what() << '\n';
            return mpqkd::cli::kExitConfig;
        }
    }

    return mpqkd::cli::run_file(config_path, overrides, mode_flag, workers, std::cout, std::cerr);
}
