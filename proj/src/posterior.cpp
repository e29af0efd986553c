#include "adbias/posterior.hpp"

#include <cmath>
#include <numbers>

#include "adbias/error.hpp"
#include "adbias/likelihood.hpp"

namespace adbias {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};

void require_gaussian(const ModelSpec& spec) {
    if (spec.family != Family::gaussian_linear) {
        throw Error(ErrorCode::invalid_argument, "conjugate Gaussian posterior needs a gaussian-linear model");
    }
}

double weighted_predictive(const Matrix& points, const Vector& log_weights, const ModelSpec& spec, const Design& x,
                           const Outcome& y) {
    check_compatible(spec, Vector(points.col(0)), x, y);
    const Eigen::ArrayXd ll = log_likelihoods(spec, points, x, y);
    return log_sum_exp(log_weights.array() + ll);
}

} // namespace

Posterior bayes_update(const Posterior& posterior, const ModelSpec& spec, const Design& x, const Outcome& y) {
    return std::visit(
        overloaded{
            [&](const GaussianPosterior& g) -> Posterior {
                require_gaussian(spec);
                check_compatible(spec, g.mean, x, y);
                return conjugate_update(g, spec.noise, poly_features(spec.degree, x.x()), y.y());
            },
            [&](const GridPosterior& g) -> Posterior { return grid_update(g, spec, x, y); },
            [&](const ParticlePosterior& p) -> Posterior { return particle_reweight(p, spec, x, y); },
        },
        posterior);
}

double predictive_log_density(const Posterior& posterior, const ModelSpec& spec, const Design& x, const Outcome& y) {
    return std::visit(
        overloaded{
            [&](const GaussianPosterior& g) {
                require_gaussian(spec);
                check_compatible(spec, g.mean, x, y);
                const NormalMoments pred = posterior_predictive(g, spec.noise, poly_features(spec.degree, x.x()));
                const double r = y.y() - pred.mean;
                return -0.5 * (std::log(2.0 * std::numbers::pi * pred.variance) + r * r / pred.variance);
            },
            [&](const GridPosterior& g) { return weighted_predictive(g.points, g.log_weights, spec, x, y); },
            [&](const ParticlePosterior& p) { return weighted_predictive(p.samples, p.log_weights, spec, x, y); },
        },
        posterior);
}

} // namespace adbias
