#include "adbias/design_select.hpp"

#include <cmath>
#include <limits>

#include "adbias/error.hpp"

namespace adbias {

namespace {
constexpr double kEigRoundoff = 1e-13;
}

std::size_t select_linear_index(const GaussianPosterior& post, int degree, const std::vector<Design>& grid) {
    if (grid.empty()) throw Error(ErrorCode::invalid_argument, "design grid is empty");
    std::size_t best = 0;
    double best_value = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const Vector phi = poly_features(degree, grid[i].x());
        const double value = phi.dot(post.cov * phi);
        if (value > best_value || (value == best_value && grid[i].x() < grid[best].x())) {
            best = i;
            best_value = value;
        }
    }
    return best;
}

Design select_linear(const GaussianPosterior& post, double sigma, int degree, const std::vector<Design>& grid) {
    if (!(sigma > 0.0)) throw Error(ErrorCode::invalid_argument, "noise standard deviation must be positive");
    return grid[select_linear_index(post, degree, grid)];
}

EigSelection select_from_predictive(const BinaryPredictive& table, const std::vector<Design>& candidates) {
    if (candidates.empty()) throw Error(ErrorCode::invalid_argument, "candidate list is empty");
    if (table.mean_entropy.size() != static_cast<Eigen::Index>(candidates.size())) {
        throw Error(ErrorCode::dimension_mismatch, "predictive table lacks entropies for every candidate");
    }
    EigSelection out;
    out.eig.resize(candidates.size());
    double best = -1.0;
    for (std::size_t j = 0; j < candidates.size(); ++j) {
        const auto jj = static_cast<Eigen::Index>(j);
        const double p1 = std::exp(table.log_p1(jj));
        const double p0 = std::exp(table.log_p0(jj));
        double eig = -(p1 * table.log_p1(jj) + p0 * table.log_p0(jj)) - table.mean_entropy(jj);
        // Differences at rounding level count as zero so degenerate posteriors tie.
        if (std::abs(eig) < kEigRoundoff) eig = 0.0;
        if (eig < 0.0) {
            if (eig < -1e-9) {
                throw Error(ErrorCode::invalid_argument,
                            "negative information gain " + std::to_string(eig) + " at candidate " + std::to_string(j));
            }
            eig = 0.0;
        }
        out.eig[j] = eig;
        if (eig > best) {
            best = eig;
            out.index = j;
        }
    }
    out.design = candidates[out.index];
    return out;
}

EigSelection select_discrete_eig(const GridPosterior& post, const ModelSpec& spec, const std::vector<Design>& candidates) {
    return select_from_predictive(binary_predictive(post.points, post.log_weights, spec, candidates, true), candidates);
}

EigSelection select_discrete_eig(const ParticlePosterior& post, const ModelSpec& spec,
                                 const std::vector<Design>& candidates) {
    return select_from_predictive(binary_predictive(post.samples, post.log_weights, spec, candidates, true), candidates);
}

DesignChoice sample_random(const TargetDistribution& g, Rng& rng) {
    if (g.kind == TargetDistribution::Kind::uniform_continuous) {
        return {Design::scalar(std::uniform_real_distribution<double>(g.lo, g.hi)(rng)), -1};
    }
    std::uniform_int_distribution<std::size_t> pick(0, g.designs.size() - 1);
    const std::size_t i = pick(rng);
    return {g.designs[i], static_cast<std::ptrdiff_t>(i)};
}

DesignChoice sample_random(const TargetDistribution& g, std::uint64_t seed) {
    Rng rng(seed);
    return sample_random(g, rng);
}

DesignChoice next_design(const DesignPolicy& policy, SelectionState& state, int t) {
    switch (policy.kind) {
        case DesignPolicy::Kind::replay: {
            if (t < 0 || static_cast<std::size_t>(t) >= policy.sequence.size()) {
                throw Error(ErrorCode::replay_exhausted, "replay sequence has " + std::to_string(policy.sequence.size()) +
                                                             " designs, step " + std::to_string(t) + " requested",
                            ErrorContext{std::nullopt, std::nullopt, t});
            }
            return {policy.sequence[static_cast<std::size_t>(t)], -1};
        }
        case DesignPolicy::Kind::random: return sample_random(state.target, state.rng);
        case DesignPolicy::Kind::adaptive: break;
    }
    if (const auto* g = std::get_if<GaussianPosterior>(&state.posterior)) {
        const std::size_t i = select_linear_index(*g, state.spec.degree, state.candidates);
        return {state.candidates[i], static_cast<std::ptrdiff_t>(i)};
    }
    EigSelection sel;
    if (state.predictive != nullptr) {
        sel = select_from_predictive(*state.predictive, state.candidates);
    } else if (const auto* grid = std::get_if<GridPosterior>(&state.posterior)) {
        sel = select_discrete_eig(*grid, state.spec, state.candidates);
    } else {
        sel = select_discrete_eig(std::get<ParticlePosterior>(state.posterior), state.spec, state.candidates);
    }
    return {sel.design, static_cast<std::ptrdiff_t>(sel.index)};
}

} // namespace adbias
