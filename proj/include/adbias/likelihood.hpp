#pragma once

#include "adbias/types.hpp"

namespace adbias {

/// Mean response beta . phi(x) of a Gaussian polynomial model.
double mean_response(const ModelSpec& spec, const ParamVector& theta, const Design& x);

/// Success logit of a binary family: epsilon times the valuation (gamble
/// families) or the polynomial (logistic-poly).
double binary_logit(const ModelSpec& spec, const ParamVector& theta, const Design& x);

/// log m(y | x, theta). Binary log-probabilities are clamped at kLogProbFloor.
double log_likelihood(const ModelSpec& spec, const ParamVector& theta, const Design& x, const Outcome& y);

/// Success logits for every column of `points` (a d x n parameter matrix).
Eigen::ArrayXd binary_logits(const ModelSpec& spec, const Matrix& points, const Design& x);

/// log m(y | x, theta_i) for every column of `points`, clamped like log_likelihood.
Eigen::ArrayXd log_likelihoods(const ModelSpec& spec, const Matrix& points, const Design& x, const Outcome& y);

/// Draw y ~ f(x).
Outcome sample_outcome(const TrueModel& truth, const Design& x, Rng& rng);

/// Throws on dimension or family mismatches between spec, theta, x and y.
void check_compatible(const ModelSpec& spec, const ParamVector& theta, const Design& x, const Outcome& y);
void check_compatible(const ModelSpec& spec, const Design& x);

} // namespace adbias
