#include <cstdio>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "branchmax/experiment.hpp"
#include "branchmax/version.hpp"

int main(int argc, char** argv) {
    CLI::App app{"branchmax - survival function of the overall maximum of a "
                 "critical/subcritical spectrally negative branching Levy process"};
    app.set_version_flag("--version", BRANCHMAX_VERSION);

    std::string config_path, preset_name, out_dir = "out";
    long long seed_override = -1;
    int threads_override = 0;
    bool list_presets = false;

    app.add_option("--config", config_path, "experiment config file (JSON)");
    app.add_option("--preset", preset_name, "named built-in experiment");
    app.add_option("--out", out_dir, "output directory")->capture_default_str();
    app.add_option("--seed", seed_override, "override the config seed");
    app.add_option("--threads", threads_override,
                   "worker threads (affects speed only, never results)");
    app.add_flag("--list-presets", list_presets, "print available presets and exit");

    CLI11_PARSE(app, argc, argv);

    if (list_presets) {
        for (const auto& [name, cfg] : branchmax::presets()) {
            std::printf("%-28s %s\n", name.c_str(),
                        cfg.at("pipeline").get<std::string>().c_str());
        }
        return 0;
    }

    nlohmann::json config;
    if (!preset_name.empty()) {
        const auto& p = branchmax::presets();
        auto it = p.find(preset_name);
        if (it == p.end()) {
            std::fprintf(stderr, "error: unknown preset '%s' (see --list-presets)\n",
                         preset_name.c_str());
            return 2;
        }
        config = it->second;
    } else if (!config_path.empty()) {
        try {
            config = branchmax::load_config_file(config_path);
        } catch (const std::exception& e) {
            std::fprintf(stderr, "error: %s\n", e.what());
            return 2;
        }
    } else {
        std::fprintf(stderr, "error: provide --config FILE or --preset NAME\n");
        return 2;
    }

    if (seed_override >= 0) config["seed"] = seed_override;
    if (threads_override > 0) config["threads"] = threads_override;

    branchmax::RunResult r = branchmax::run_experiment(config, out_dir);
    if (r.exit_code == 0) {
        std::printf("wrote %zu artifact(s) to %s\n", r.artifacts.size(), out_dir.c_str());
    } else {
        std::fprintf(stderr, "error: %s\n", r.message.c_str());
    }
    return r.exit_code;
}
