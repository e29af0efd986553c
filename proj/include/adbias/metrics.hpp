#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "adbias/posterior.hpp"
#include "adbias/types.hpp"

namespace adbias {

/// Held-out data used to estimate risk. Regression sets carry sampled (x, y)
/// pairs; binary sets carry the true success logit at every design so risk can be
/// taken as an exact expectation over y.
struct EvalSet {
    std::vector<Design> designs;
    std::vector<Outcome> outcomes;
    std::vector<double> true_logits;
    std::uint64_t seed = 0;

    [[nodiscard]] bool is_binary() const { return !true_logits.empty(); }
    [[nodiscard]] std::size_t size() const { return designs.size(); }
};

EvalSet make_regression_eval(const TrueModel& truth, const TargetDistribution& g, int size, std::uint64_t seed);
EvalSet make_binary_eval(const TrueModel& truth, std::vector<Design> designs);

struct AlbRecord {
    double d_model = 0.0;
    double alb = 0.0;
    int replication = 0;
};

/// Mean negative log predictive density over the evaluation set (regression),
/// or mean expected cross-entropy -sum_y f(y|x) log m(y|x) over designs (binary).
double risk_nll(const Posterior& posterior, const ModelSpec& spec, const EvalSet& eval);
/// Risk of the single model m(x, theta).
double risk_nll(const ParamVector& theta, const ModelSpec& spec, const EvalSet& eval);
/// Binary risk from an already computed predictive table over eval.designs.
double risk_from_predictive(const BinaryPredictive& table, const EvalSet& eval);

/// Risk of the true model itself: its entropy (binary) or NLL (regression).
double true_model_risk(const TrueModel& truth, const EvalSet& eval);

/// Mean over g's evaluation grid (1,001 points or the design list) of
/// KL(f(x) || m(x, theta_ref)).
double d_model(const TrueModel& truth, const ParamVector& theta_ref, const ModelSpec& spec, const TargetDistribution& g,
               int grid_points = 1001);

/// Binary families: mean KL from f(x) to the posterior predictive m(x, theta_hat).
double d_model_predictive(const TrueModel& truth, const Posterior& posterior, const ModelSpec& spec,
                          const TargetDistribution& g, int grid_points = 1001);

/// Lattice column minimizing expected binary cross-entropy on `designs`.
ParamVector theta_star_grid(const TrueModel& truth, const ModelSpec& spec, const Matrix& lattice,
                            const std::vector<Design>& designs);

/// risk_adaptive / risk_star - 1.
double alb(double risk_adaptive, double risk_star);
/// scale * (risk_adaptive / risk_passive - 1).
double alb_vs_passive(double risk_adaptive, double risk_passive, double scale = 50.0);

/// Spearman rank correlation with average ranks for ties.
double spearman(std::span<const double> xs, std::span<const double> ys);

/// One-sided permutation p-value for a positive rank correlation:
/// (1 + #{permutations with rho >= observed}) / (1 + permutations).
double spearman_permutation_pvalue(std::span<const double> xs, std::span<const double> ys, int permutations,
                                   std::uint64_t seed);

/// Average ranks (1-based) with ties sharing their mean rank.
std::vector<double> average_ranks(std::span<const double> values);

} // namespace adbias
