#pragma once

#include <variant>

#include "adbias/approx_posterior.hpp"
#include "adbias/linreg.hpp"
#include "adbias/types.hpp"

namespace adbias {

/// Any of the three posterior representations. Updates return new values.
using Posterior = std::variant<GaussianPosterior, GridPosterior, ParticlePosterior>;

/// Bayes's rule for one observation: prior weight times likelihood, renormalized.
/// Particle posteriors are reweighted in place of their samples (no RNG here).
Posterior bayes_update(const Posterior& posterior, const ModelSpec& spec, const Design& x, const Outcome& y);

/// log of the posterior predictive density/probability of y at x.
double predictive_log_density(const Posterior& posterior, const ModelSpec& spec, const Design& x, const Outcome& y);

} // namespace adbias
