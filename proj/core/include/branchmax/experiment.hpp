#ifndef BRANCHMAX_EXPERIMENT_HPP
#define BRANCHMAX_EXPERIMENT_HPP

#include <map>
#include <string>

#include <json.hpp>

#include "branchmax/levy_model.hpp"
#include "branchmax/offspring.hpp"

namespace branchmax {

// A schema-validated experiment description. Unknown keys are rejected.
// Pipelines: phi, scale, simulate, solve, asymptotics, compare.
struct ExperimentConfig {
    nlohmann::json raw;
    std::string pipeline;
    std::uint64_t seed = 1;
    int threads = 1;

    static ExperimentConfig parse(const nlohmann::json& j);
};

LevyModel model_from_json(const nlohmann::json& j);
OffspringLaw offspring_from_json(const nlohmann::json& j);

struct RunResult {
    int exit_code = 0;
    std::string message;
    std::vector<std::string> artifacts;
};

// Executes the pipeline and writes its artifacts plus manifest.json into
// out_dir. Never throws: failures are encoded in the exit code (2 validation,
// 3 numerical) and message.
RunResult run_experiment(const nlohmann::json& config, const std::string& out_dir);

nlohmann::json load_config_file(const std::string& path);

// Named configurations for the standard study set.
const std::map<std::string, nlohmann::json>& presets();

std::string config_hash(const nlohmann::json& config);

} // namespace branchmax

#endif
