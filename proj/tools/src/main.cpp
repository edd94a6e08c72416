#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include "dispersion_lab/runner.hpp"

namespace dl = dispersion_lab;

namespace {

int report(const dl::RunOutcome& outcome, bool wrote_files) {
    for (const auto& m : outcome.messages) std::cerr << m << '\n';
    if (wrote_files && outcome.exit_code != dl::kExitError) {
        std::cout << "config_hash " << outcome.config_hash << '\n'
                  << "wrote " << outcome.output_dir.string() << '\n';
    }
    if (outcome.exit_code == dl::kExitHypothesisViolation) {
        std::cerr << "hypothesis violated: results were written but the estimate does not apply\n";
    }
    return outcome.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Numerical experiments for randomly time-modulated Schrodinger flows", "dispersion-lab"};
    app.set_version_flag("--version", dl::library_version());
    app.require_subcommand(1);

    std::string run_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out_dir;
    auto* run = app.add_subcommand("run", "Run the experiment described by a config file");
    run->add_option("config", run_path, "YAML config file")->required();
    run->add_option("--seed", seed, "Override stochastic.seed");
    run->add_option("--out", out_dir, "Override output_dir");

    auto* list = app.add_subcommand("list", "List the available experiments");

    std::string validate_path;
    auto* validate = app.add_subcommand("validate", "Parse and check a config file without running it");
    validate->add_option("config", validate_path, "YAML config file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? dl::kExitSuccess : dl::kExitError;
    }

    try {
        if (*list) {
            std::cout << dl::list_experiments();
            return dl::kExitSuccess;
        }
        if (*validate) {
            const auto outcome = dl::validate_config_file(validate_path);
            for (const auto& m : outcome.messages) std::cerr << m << '\n';
            if (outcome.exit_code == dl::kExitSuccess) std::cout << "ok " << outcome.config_hash << '\n';
            return outcome.exit_code;
        }
        dl::RunOverrides overrides;
        overrides.seed = seed;
        if (out_dir) overrides.output_dir = *out_dir;
        return report(dl::run_config_file(run_path, overrides), true);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return dl::kExitError;
    }
}
