#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "adbias/approx_posterior.hpp"
#include "adbias/config.hpp"
#include "adbias/metrics.hpp"
#include "adbias/types.hpp"

namespace adbias {

struct StepRecord {
    int t = 0;
    double design = 0.0;  // x, or the gamble index for gamble targets
    double risk = 0.0;
};

struct RiskTrajectory {
    std::string arm;
    int replication = 0;
    std::vector<StepRecord> steps;  // t = 1..T
};

struct ReplicationResult {
    int replication = 0;
    ParamVector truth_params;
    ParamVector theta_star;
    double risk_star = 0.0;   // risk of m(x, theta*) on the eval set
    double true_risk = 0.0;   // risk of f itself on the eval set
    double d_model = 0.0;
    double alb = 0.0;         // alb arm at t = T against risk_star
    std::vector<RiskTrajectory> arms;  // config order
};

struct DesignHistogram {
    std::string arm;
    std::vector<double> bin_lo;
    std::vector<double> bin_hi;
    std::vector<long long> counts;
};

struct ArmSummary {
    std::string arm;
    std::vector<double> mean_risk;  // index t - 1
    std::vector<double> stderr_risk;
};

struct BatchSummary {
    std::string experiment;
    std::vector<ArmSummary> arms;
    double theta_star_risk = 0.0;  // mean over replications
    double true_risk = 0.0;
    std::vector<AlbRecord> alb_records;
    std::vector<DesignHistogram> histograms;
    /// 50 (mean adaptive / mean random - 1) per step; empty unless both arms exist.
    std::vector<double> alb_vs_passive;
    std::vector<ReplicationResult> replications;

    [[nodiscard]] const ArmSummary& arm(const std::string& name) const;
};

/// A validated configuration plus everything shared by its replications.
class Experiment {
public:
    explicit Experiment(ExperimentConfig config);

    [[nodiscard]] const ExperimentConfig& config() const { return config_; }
    [[nodiscard]] const TargetDistribution& target() const { return target_; }
    [[nodiscard]] const std::vector<Design>& candidates() const { return candidates_; }
    /// Pre-selected generating parameters for pooled truths (empty otherwise).
    [[nodiscard]] const std::vector<ParamVector>& truth_pool() const { return pool_; }

    [[nodiscard]] TrueModel draw_truth(int replication) const;
    [[nodiscard]] ReplicationResult run_replication(int replication) const;
    /// Runs all replications on up to `jobs` threads; results are reduced in
    /// replication order, so the summary does not depend on `jobs`.
    [[nodiscard]] BatchSummary run_batch(int jobs = 1, const std::function<void(int)>& on_done = {}) const;

private:
    [[nodiscard]] ParamVector theta_star(const TrueModel& truth) const;
    [[nodiscard]] RiskTrajectory run_arm(const ArmConfig& arm, int replication, const TrueModel& truth,
                                         const EvalSet& eval) const;

    ExperimentConfig config_;
    TargetDistribution target_;
    std::vector<Design> candidates_;
    std::vector<ParamVector> pool_;
    std::optional<GridPosterior> lattice_prior_;  // gamble classes
    std::optional<LatticeTable> lattice_table_;
};

ReplicationResult run_replication(const ExperimentConfig& config, int replication);
BatchSummary run_batch(const ExperimentConfig& config, int jobs = 1);

/// Aggregates replication results (any order) into per-arm means and standard errors.
BatchSummary summarize(const ExperimentConfig& config, std::vector<ReplicationResult> results);

/// Adaptive design sequence of the conjugate linear model; it does not depend on
/// the observed outcomes, so no data are needed.
std::vector<Design> linear_adaptive_sequence(const ModelSpec& spec, const std::vector<Design>& grid, int horizon);

} // namespace adbias
