#pragma once

#include <vector>

#include "adbias/types.hpp"

namespace adbias {

/// [1, x, x^2, ..., x^k].
Vector poly_features(int degree, double x);

/// Conjugate posterior N(mean, cov) over polynomial regression coefficients.
struct GaussianPosterior {
    Vector mean;
    Matrix cov;

    static GaussianPosterior from_prior(const PriorSpec& prior);
};

/// One Bayesian update with a known noise standard deviation `sigma`:
///   S_t = (S_{t-1}^{-1} + phi phi^T / sigma^2)^{-1}
///   M_t = S_t (S_{t-1}^{-1} M_{t-1} + phi y / sigma^2)
/// Inversions go through Cholesky; the result is re-symmetrized.
GaussianPosterior conjugate_update(const GaussianPosterior& post, double sigma, const Vector& phi, double y);

/// Expected information gain of observing y at features phi:
/// 0.5 log(sigma^2 + phi^T S phi) - log(sigma).
double eig_linear(const GaussianPosterior& post, double sigma, const Vector& phi);

struct NormalMoments {
    double mean = 0.0;
    double variance = 0.0;
};

/// y | x ~ N(M phi, sigma^2 + phi^T S phi).
NormalMoments posterior_predictive(const GaussianPosterior& post, double sigma, const Vector& phi);

/// Least-squares polynomial coefficients of degree `degree` through (xs, ys).
ParamVector ols_fit(const std::vector<double>& xs, const std::vector<double>& ys, int degree);

/// Best-fitting coefficients of a degree-k Gaussian class: the least-squares fit
/// to E_f[y|x] on 1,001 evenly spaced points of the continuous target domain.
ParamVector theta_star_ols(const TrueModel& truth, int degree, const TargetDistribution& domain);

/// KL( N(mu_f, sigma_f^2) || N(mu_m, sigma_m^2) ).
double gaussian_kl(double mu_f, double sigma_f, double mu_m, double sigma_m);

} // namespace adbias
