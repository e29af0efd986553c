#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "adbias/design_select.hpp"
#include "adbias/types.hpp"

namespace adbias {

/// Distribution the generating parameters are drawn from once per replication.
struct GeneratingSpec {
    enum class Kind { prior, fixed };

    Kind kind = Kind::prior;
    PriorSpec prior;
    ParamVector value;  // fixed only
    /// Logistic truths: draw `pool_size` candidates and keep the `keep_fraction`
    /// most misspecified (by D_model against the hypothesized class). 0 disables.
    int pool_size = 0;
    double keep_fraction = 0.1;
};

struct TruthConfig {
    Family family = Family::gaussian_linear;
    int degree = 0;
    double noise = 1.0;
    GeneratingSpec generating;

    /// ModelSpec shell of the truth (prior unused except for bounds).
    [[nodiscard]] ModelSpec spec() const;
};

struct TargetConfig {
    enum class Kind { uniform_continuous, gamble_space };

    Kind kind = Kind::uniform_continuous;
    double lo = 0.0;
    double hi = 1.0;
    int gamble_count = 200;
    std::uint64_t gamble_seed = 0;
};

struct ArmConfig {
    std::string name;
    DesignPolicy policy;
};

struct PosteriorOptions {
    int grid_points = 1001;     // lattice points per dimension for bounded classes
    int particles = 10000;      // logistic-poly classes
    double refresh_ess_fraction = 1.0;  // refresh when ESS < fraction * particles
};

struct ExperimentConfig {
    std::string name = "experiment";
    TruthConfig truth;
    ModelSpec model;
    TargetConfig target;
    int design_grid_points = 1001;
    int horizon = 100;
    int replications = 200;
    std::uint64_t base_seed = 0;
    int eval_size = 100;
    std::vector<ArmConfig> arms;
    std::string alb_arm = "adaptive";
    PosteriorOptions posterior;
    std::string output_dir = "out";

    [[nodiscard]] TargetDistribution target_distribution() const;
    /// Candidate designs: the design grid for continuous targets, the gamble list otherwise.
    [[nodiscard]] std::vector<Design> candidates() const;
    /// Throws Error(config) naming the offending field.
    void validate() const;
};

nlohmann::json to_json(const ExperimentConfig& config);
/// Throws Error(config) with a JSON-pointer path for schema violations.
ExperimentConfig config_from_json(const nlohmann::json& doc);
/// Throws Error(config) with line/column for syntax errors.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);

} // namespace adbias
