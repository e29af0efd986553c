#include "adbias/likelihood.hpp"

#include <cmath>
#include <numbers>

#include "adbias/binary_models.hpp"
#include "adbias/error.hpp"
#include "adbias/linreg.hpp"

namespace adbias {

namespace {

Eigen::Index design_dim(Family family) {
    return (family == Family::eut || family == Family::cpt) ? 3 : 1;
}

double valuation(const ModelSpec& spec, const ParamVector& theta, const Design& x) {
    switch (spec.family) {
        case Family::gaussian_linear:
        case Family::logistic_poly: return theta.dot(poly_features(spec.degree, x.x()));
        case Family::eut: return eut_value({theta(0)}, Gamble::from_design(x));
        case Family::cpt: return cpt_value({theta(0), theta(1), theta(2)}, Gamble::from_design(x));
    }
    return 0.0;
}

Eigen::ArrayXd log_sigmoid_array(const Eigen::ArrayXd& z) {
    // log sigmoid(z) = -(max(-z, 0) + log1p(exp(-|z|)))
    const Eigen::ArrayXd tail = (-z.abs()).exp().log1p();
    return (-((-z).max(0.0) + tail)).max(kLogProbFloor);
}

} // namespace

void check_compatible(const ModelSpec& spec, const Design& x) {
    if (x.dim() != design_dim(spec.family)) {
        throw Error(ErrorCode::dimension_mismatch, "design has " + std::to_string(x.dim()) + " entries but family " +
                                                       std::string(to_string(spec.family)) + " expects " +
                                                       std::to_string(design_dim(spec.family)));
    }
    if (!x.value.allFinite()) throw Error(ErrorCode::invalid_argument, "design entries must be finite");
}

void check_compatible(const ModelSpec& spec, const ParamVector& theta, const Design& x, const Outcome& y) {
    if (theta.size() != spec.param_dim()) {
        throw Error(ErrorCode::dimension_mismatch, "parameter vector has " + std::to_string(theta.size()) +
                                                       " entries, model expects " + std::to_string(spec.param_dim()));
    }
    check_compatible(spec, x);
    if (y.value.size() != 1 || !std::isfinite(y.y())) {
        throw Error(ErrorCode::invalid_argument, "outcome must be a single finite value");
    }
    if (spec.is_binary() && y.y() != 0.0 && y.y() != 1.0) {
        throw Error(ErrorCode::invalid_argument, "binary family needs an outcome in {0,1}");
    }
}

double mean_response(const ModelSpec& spec, const ParamVector& theta, const Design& x) {
    if (spec.family != Family::gaussian_linear) {
        throw Error(ErrorCode::invalid_argument, "mean_response is defined for gaussian-linear models only");
    }
    return valuation(spec, theta, x);
}

double binary_logit(const ModelSpec& spec, const ParamVector& theta, const Design& x) {
    if (!spec.is_binary()) throw Error(ErrorCode::invalid_argument, "binary_logit needs a binary family");
    return spec.noise * valuation(spec, theta, x);
}

double log_likelihood(const ModelSpec& spec, const ParamVector& theta, const Design& x, const Outcome& y) {
    check_compatible(spec, theta, x, y);
    if (spec.family == Family::gaussian_linear) {
        const double sigma = spec.noise;
        const double r = (y.y() - valuation(spec, theta, x)) / sigma;
        return -0.5 * r * r - std::log(sigma) - 0.5 * std::log(2.0 * std::numbers::pi);
    }
    const double z = binary_logit(spec, theta, x);
    return clamped_log_sigmoid(y.y() == 1.0 ? z : -z);
}

Eigen::ArrayXd binary_logits(const ModelSpec& spec, const Matrix& points, const Design& x) {
    if (!spec.is_binary()) throw Error(ErrorCode::invalid_argument, "binary_logits needs a binary family");
    check_compatible(spec, x);
    if (points.rows() != spec.param_dim()) {
        throw Error(ErrorCode::dimension_mismatch, "parameter matrix rows do not match model dimension");
    }
    switch (spec.family) {
        case Family::logistic_poly: {
            const Vector phi = poly_features(spec.degree, x.x());
            return spec.noise * (phi.transpose() * points).transpose().array();
        }
        case Family::eut: {
            const Gamble g = Gamble::from_design(x);
            const Eigen::ArrayXd alpha = points.row(0).transpose().array();
            return spec.noise * (g.p * (alpha * std::log(g.gain)).exp() - (1.0 - g.p) * (alpha * std::log(-g.loss)).exp());
        }
        default: {
            Eigen::ArrayXd z(points.cols());
            for (Eigen::Index i = 0; i < points.cols(); ++i) z(i) = binary_logit(spec, points.col(i), x);
            return z;
        }
    }
}

Eigen::ArrayXd log_likelihoods(const ModelSpec& spec, const Matrix& points, const Design& x, const Outcome& y) {
    if (spec.family == Family::gaussian_linear) {
        check_compatible(spec, x);
        const Vector phi = poly_features(spec.degree, x.x());
        const Eigen::ArrayXd mu = (phi.transpose() * points).transpose().array();
        const double sigma = spec.noise;
        return -0.5 * ((y.y() - mu) / sigma).square() - std::log(sigma) - 0.5 * std::log(2.0 * std::numbers::pi);
    }
    if (y.value.size() != 1 || (y.y() != 0.0 && y.y() != 1.0)) {
        throw Error(ErrorCode::invalid_argument, "binary family needs an outcome in {0,1}");
    }
    const Eigen::ArrayXd z = binary_logits(spec, points, x);
    return log_sigmoid_array(y.y() == 1.0 ? z : Eigen::ArrayXd(-z));
}

Outcome sample_outcome(const TrueModel& truth, const Design& x, Rng& rng) {
    if (truth.spec.family == Family::gaussian_linear) {
        std::normal_distribution<double> noise(0.0, truth.spec.noise);
        return Outcome::scalar(mean_response(truth.spec, truth.params, x) + noise(rng));
    }
    const double p = std::exp(log_sigmoid(binary_logit(truth.spec, truth.params, x)));
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    return Outcome::binary(unit(rng) < p ? 1 : 0);
}

} // namespace adbias
