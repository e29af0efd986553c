#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "adbias/types.hpp"

namespace adbias {

/// Normalize log-weights so that their exponentials sum to one.
Vector normalize_log_weights(const Vector& log_weights);
double log_sum_exp(const Eigen::ArrayXd& values);

/// Effective sample size 1 / sum w_i^2 of normalized log-weights.
double effective_sample_size(const Vector& log_weights);

/// Posterior on a fixed lattice of parameter values.
struct GridPosterior {
    Matrix points;       // d x n, one lattice point per column
    Vector log_weights;  // normalized

    /// Evenly spaced lattice over a bounded space with `points_per_dim` values per
    /// coordinate, weighted by the prior density.
    static GridPosterior lattice(const ModelSpec& spec, int points_per_dim);
    static GridPosterior from_points(Matrix points, Vector log_weights);
    static GridPosterior point_mass(const ParamVector& theta);

    [[nodiscard]] Eigen::Index size() const { return points.cols(); }
    [[nodiscard]] Vector weights() const { return log_weights.array().exp(); }
};

/// Exact Bayes update on the lattice.
GridPosterior grid_update(const GridPosterior& post, const ModelSpec& spec, const Design& x, const Outcome& y);

struct Observation {
    Design x;
    Outcome y;
};

/// Weighted-sample posterior refreshed through a weighted Gaussian KDE proposal.
///
/// `log_target` caches log[prior(theta_i) * prod_s m(y_s | x_s, theta_i)] for every
/// sample so reweighting by a new observation is a single likelihood evaluation.
/// `history` keeps the observations needed to score freshly proposed samples.
struct ParticlePosterior {
    Matrix samples;      // d x n
    Vector log_weights;  // normalized
    Vector log_target;
    Vector bandwidth;    // per-dimension kernel standard deviation of the last refresh
    std::vector<Observation> history;
    int refreshes = 0;

    [[nodiscard]] Eigen::Index size() const { return samples.cols(); }
    [[nodiscard]] Vector weights() const { return log_weights.array().exp(); }
    [[nodiscard]] double ess() const { return effective_sample_size(log_weights); }
};

/// `count` equally weighted draws from the model's prior.
ParticlePosterior particle_init(const ModelSpec& spec, int count, std::uint64_t seed);

/// Importance reweighting by one observation (no new samples; deterministic).
ParticlePosterior particle_reweight(const ParticlePosterior& post, const ModelSpec& spec, const Design& x,
                                    const Outcome& y);

/// Redraw the sample set from a weighted Gaussian KDE of the current
/// (samples, weights) and importance-weight the draws against the exact
/// unnormalized posterior. Kernel covariance follows Scott's rule on the weighted
/// sample covariance, n_eff^(-2/(d+4)) * Cov_w, with n_eff the ESS.
ParticlePosterior particle_refresh(const ParticlePosterior& post, const ModelSpec& spec, std::uint64_t seed);

/// One sequential step: reweight by (x, y), then refresh through the KDE proposal.
ParticlePosterior particle_step(const ParticlePosterior& post, const ModelSpec& spec, const Design& x,
                                const Outcome& y, std::uint64_t seed);

using ParamFunction = std::function<double(const ParamVector&)>;

/// sum_i w_i h(theta_i).
double posterior_expectation(const GridPosterior& post, const ParamFunction& h);
double posterior_expectation(const ParticlePosterior& post, const ParamFunction& h);

/// Posterior-predictive success probabilities of a binary family at a list of
/// designs, with the posterior-mean Bernoulli entropy when requested.
/// Points whose normalized weight is below 1e-16 are skipped.
struct BinaryPredictive {
    Eigen::ArrayXd log_p1;
    Eigen::ArrayXd log_p0;
    Eigen::ArrayXd mean_entropy;  // empty unless requested
};

BinaryPredictive binary_predictive(const Matrix& points, const Vector& log_weights, const ModelSpec& spec,
                                   const std::vector<Design>& designs, bool with_entropy);

/// Per-point choice probabilities on a fixed lattice, tabulated once so that
/// predictive tables for any weighting reduce to matrix-vector products.
struct LatticeTable {
    Matrix p1;       // points x designs
    Matrix p0;
    Matrix log_p1;
    Matrix log_p0;
    Matrix entropy;  // Bernoulli entropy of each (point, design) pair
};

LatticeTable lattice_table(const Matrix& points, const ModelSpec& spec, const std::vector<Design>& designs);
BinaryPredictive binary_predictive(const LatticeTable& table, const Vector& log_weights, bool with_entropy);

} // namespace adbias
