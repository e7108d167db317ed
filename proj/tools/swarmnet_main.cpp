#include <cstdlib>
#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "swarmnet/config.hpp"
#include "swarmnet/errors.hpp"
#include "swarmnet/harness.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfigError = 1;
constexpr int kExitIoError = 2;

std::string resolved_output_dir(const swarmnet::ExperimentConfig& cfg,
                                const std::string& cli_out) {
    if (!cli_out.empty()) return cli_out;
    if (const char* env = std::getenv("SWARMNET_OUTPUT_DIR"); env != nullptr && *env != '\0')
        return env;
    return cfg.run.output_dir;
}

void print_warnings(const std::vector<std::string>& warnings) {
    for (const std::string& w : warnings) std::cerr << "warning: " << w << "\n";
}

int run_command(const std::string& config_path, int trials, long long seed,
                const std::string& out) {
    swarmnet::ExperimentConfig cfg = swarmnet::load_config_file(config_path);
    if (trials > 0) cfg.run.trials = trials;
    if (seed >= 0) cfg.run.master_seed = static_cast<std::uint64_t>(seed);
    cfg.run.output_dir = resolved_output_dir(cfg, out);

    std::vector<std::string> warnings;
    swarmnet::validate_config(cfg, &warnings);
    print_warnings(warnings);

    const swarmnet::BatchResult result = swarmnet::run_batch_to_dir(cfg, cfg.run.output_dir);
    std::cout << "wrote " << result.trials.size() << " trial record(s) to " << cfg.run.output_dir
              << "\n";
    std::cout << result.batch_record.dump(2) << "\n";
    return kExitOk;
}

int sweep_command(const std::string& config_path, const std::string& param,
                  const std::vector<std::string>& values, int trials, long long seed,
                  const std::string& out) {
    const swarmnet::ExperimentConfig base = swarmnet::load_config_file(config_path);
    for (const std::string& value : values) {
        swarmnet::ExperimentConfig cfg = base;
        swarmnet::apply_override(cfg, param, value);
        if (trials > 0) cfg.run.trials = trials;
        if (seed >= 0) cfg.run.master_seed = static_cast<std::uint64_t>(seed);
        const std::string root = resolved_output_dir(cfg, out);

        std::vector<std::string> warnings;
        swarmnet::validate_config(cfg, &warnings);
        print_warnings(warnings);

        const std::filesystem::path dir = std::filesystem::path(root) / (param + "=" + value);
        swarmnet::run_batch_to_dir(cfg, dir);
        std::cout << param << "=" << value << " -> " << dir.string() << "\n";
    }
    return kExitOk;
}

int validate_command(const std::string& config_path) {
    const swarmnet::ExperimentConfig cfg = swarmnet::load_config_file(config_path);
    std::vector<std::string> warnings;
    swarmnet::validate_config(cfg, &warnings);
    print_warnings(warnings);
    std::cout << "config ok: " << config_path << "\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"swarmnet: swarm control experiments over a slot-level TSCH mesh model"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    std::string sweep_param;
    std::vector<std::string> sweep_values;
    int trials = 0;
    long long seed = -1;

    CLI::App* run = app.add_subcommand("run", "run one batch of seeded trials");
    run->add_option("--config", config_path, "experiment config file (flat JSON keys)")
        ->required();
    run->add_option("--trials", trials, "override run.trials");
    run->add_option("--seed", seed, "override run.master_seed");
    run->add_option("--out", out_dir, "override output directory");

    CLI::App* sweep = app.add_subcommand("sweep", "run one batch per value of a config key");
    sweep->add_option("--config", config_path, "experiment config file")->required();
    sweep->add_option("--param", sweep_param, "config key to sweep, e.g. link.variant")
        ->required();
    sweep
        ->add_option("--values", sweep_values,
                     "comma-separated values, e.g. unit_disk,experimental_randomness")
        ->required()
        ->delimiter(',');
    sweep->add_option("--trials", trials, "override run.trials");
    sweep->add_option("--seed", seed, "override run.master_seed");
    sweep->add_option("--out", out_dir, "override output root directory");

    CLI::App* validate = app.add_subcommand("validate", "check a config and exit");
    validate->add_option("--config", config_path, "experiment config file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitConfigError;
    }

    try {
        if (run->parsed()) return run_command(config_path, trials, seed, out_dir);
        if (sweep->parsed())
            return sweep_command(config_path, sweep_param, sweep_values, trials, seed, out_dir);
        if (validate->parsed()) return validate_command(config_path);
    } catch (const swarmnet::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfigError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIoError;
    }
    return kExitConfigError;
}
