#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "ncrs/environment.hpp"

namespace ncrs {

enum class Optimizer { CmaEs, CmaMe };

std::string_view optimizer_name(Optimizer o);  // "cma-es" | "cma-me"
Optimizer parse_optimizer(std::string_view name);

/// Everything a training or evaluation run needs. Zero-valued "auto" fields
/// resolve to the reference setup: lambda 112 (CMA-ES) / 128 (CMA-ME),
/// 20000 / 60000 generations, and the constrained feature-triple count.
struct RunConfig {
    Task task = Task::LightChasing;
    Optimizer optimizer = Optimizer::CmaEs;
    GridDims dims{5, 5};
    int lambda = 0;
    int emitters = 15;
    int generations = 0;
    std::uint64_t seed = 0;
    int train_episodes = 12;
    int test_episodes = 100;
    double sigma0 = 0.01;
    int stuck_limit = 500;
    long long total_configurations = 0;
    Activation activation = Activation::Relu;
    std::string output_dir = "run";
    int jobs = 0;               // 0: NCRS_JOBS or 1
    int checkpoint_every = 0;   // 0: only at the end
    SimSettings sim;

    int resolved_lambda() const;
    int resolved_generations() const;
    long long resolved_total_configurations() const;
    int resolved_jobs() const;

    EvalSettings eval_settings() const;

    bool operator==(const RunConfig&) const = default;
};

/// Parses `key = value` lines; `#` starts a comment. Unknown keys and bad values
/// raise ConfigError naming the line.
RunConfig parse_run_config(const std::string& text);
RunConfig load_run_config(const std::filesystem::path& path);

/// Every key, one per line, in a fixed order; parse_run_config inverts it exactly.
std::string serialize_run_config(const RunConfig& config);

/// Applies a single `key`, `value` pair (used by CLI overrides).
void set_config_value(RunConfig& config, const std::string& key, const std::string& value);

} // namespace ncrs
