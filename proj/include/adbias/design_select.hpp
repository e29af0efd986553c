#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "adbias/posterior.hpp"
#include "adbias/types.hpp"

namespace adbias {

/// How an arm picks its next design.
struct DesignPolicy {
    enum class Kind { adaptive, random, replay };

    Kind kind = Kind::adaptive;
    std::vector<Design> sequence;  // replay only

    static DesignPolicy adaptive() { return {Kind::adaptive, {}}; }
    static DesignPolicy random() { return {Kind::random, {}}; }
    static DesignPolicy replay(std::vector<Design> sequence) { return {Kind::replay, std::move(sequence)}; }
};

/// A chosen design plus its position in the candidate list, when it has one.
struct DesignChoice {
    Design design;
    std::ptrdiff_t index = -1;
};

/// Index of the grid point maximizing phi(x)^T S phi(x); ties go to the smallest x.
std::size_t select_linear_index(const GaussianPosterior& post, int degree, const std::vector<Design>& grid);

/// Bayesian D-optimal design for the conjugate linear model. `sigma` only shifts
/// the information gain by a constant and so never changes the argmax.
Design select_linear(const GaussianPosterior& post, double sigma, int degree, const std::vector<Design>& grid);

struct EigSelection {
    std::size_t index = 0;
    Design design;
    std::vector<double> eig;
};

/// Binary-outcome expected information gain H_b(pbar(x)) - E_theta[H_b(p_theta(x))]
/// read off a precomputed predictive table; ties go to the lowest index.
EigSelection select_from_predictive(const BinaryPredictive& table, const std::vector<Design>& candidates);

EigSelection select_discrete_eig(const GridPosterior& post, const ModelSpec& spec, const std::vector<Design>& candidates);
EigSelection select_discrete_eig(const ParticlePosterior& post, const ModelSpec& spec,
                                 const std::vector<Design>& candidates);

/// Uniform draw from g.
DesignChoice sample_random(const TargetDistribution& g, Rng& rng);
DesignChoice sample_random(const TargetDistribution& g, std::uint64_t seed);

/// Everything next_design may consult. `predictive` lets a caller reuse a
/// binary predictive table already computed for the current posterior.
struct SelectionState {
    const Posterior& posterior;
    const ModelSpec& spec;
    const std::vector<Design>& candidates;
    const TargetDistribution& target;
    Rng& rng;
    const BinaryPredictive* predictive = nullptr;
};

/// Dispatch on the policy kind for step t (0-based).
DesignChoice next_design(const DesignPolicy& policy, SelectionState& state, int t);

} // namespace adbias
