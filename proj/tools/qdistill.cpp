// Command-line driver: runs experiment configs or built-in presets and writes
// the CSV series / summary files consumed by the plotting scripts.

#include "qdistill/experiment.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

namespace {

struct CommonOptions {
    std::string out_dir = ".";
    std::optional<std::uint64_t> seed;
    std::string base;
    int threads = 1;
};

void add_common(CLI::App* cmd, CommonOptions& opts) {
    cmd->add_option("--out-dir", opts.out_dir, "directory for emitted files");
    cmd->add_option("--seed", opts.seed, "override the run's RNG seed");
    cmd->add_option("--base", opts.base, "log base for entropies: nat or 2")
        ->check(CLI::IsMember({"nat", "2"}));
    cmd->add_option("--threads", opts.threads, "worker threads for sweep grids")
        ->check(CLI::PositiveNumber);
}

qdistill::RunOptions to_run_options(const CommonOptions& opts) {
    qdistill::RunOptions run_opts;
    run_opts.out_dir = opts.out_dir;
    run_opts.seed = opts.seed;
    if (opts.base == "nat") run_opts.base = qdistill::LogBase::natural;
    if (opts.base == "2") run_opts.base = qdistill::LogBase::two;
    run_opts.threads = opts.threads;
    return run_opts;
}

int execute(const qdistill::ExperimentConfig& cfg, const CommonOptions& opts) {
    const auto result = qdistill::run(cfg, to_run_options(opts));
    for (const auto& file : result.files) std::printf("wrote %s\n", file.c_str());
    std::printf("final_entropy %s  bound %s  wall %.2fs\n",
                qdistill::format_number(result.final_entropy).c_str(),
                qdistill::format_number(result.bound).c_str(), result.wall_seconds);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"greedy bang-bang entropy distillation for Bose-Hubbard and Ising chains"};
    app.require_subcommand(1);

    std::string config_path, preset_name, bound_path;
    CommonOptions run_opts, preset_opts, bound_opts;

    auto* run_cmd = app.add_subcommand("run", "run an experiment described by a config file");
    run_cmd->add_option("config", config_path, "JSON config file")->required();
    add_common(run_cmd, run_opts);

    auto* preset_cmd = app.add_subcommand("preset", "run a built-in preset by name");
    preset_cmd->add_option("name", preset_name, "preset name (see list-presets)")->required();
    add_common(preset_cmd, preset_opts);

    auto* list_cmd = app.add_subcommand("list-presets", "list built-in presets");

    auto* bound_cmd =
        app.add_subcommand("bound", "compute only the entropy lower bound for a config");
    bound_cmd->add_option("config", bound_path, "JSON config file")->required();
    add_common(bound_cmd, bound_opts);

    CLI11_PARSE(app, argc, argv);

    try {
        if (run_cmd->parsed()) {
            return execute(qdistill::load_config_file(config_path), run_opts);
        }
        if (preset_cmd->parsed()) {
            const qdistill::Preset* preset = qdistill::find_preset(preset_name);
            if (!preset) {
                std::fprintf(stderr, "unknown preset '%s'; see list-presets\n", preset_name.c_str());
                return 2;
            }
            return execute(preset->config, preset_opts);
        }
        if (list_cmd->parsed()) {
            for (const auto& preset : qdistill::presets())
                std::printf("%-22s %s\n", preset.name.c_str(), preset.description.c_str());
            return 0;
        }
        if (bound_cmd->parsed()) {
            qdistill::ExperimentConfig cfg = qdistill::load_config_file(bound_path);
            cfg.mode = qdistill::Mode::bound;
            return execute(cfg, bound_opts);
        }
    } catch (const qdistill::ConfigError& e) {
        std::fprintf(stderr, "%s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
