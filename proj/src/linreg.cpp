#include "adbias/linreg.hpp"

#include <cmath>

#include "adbias/error.hpp"

namespace adbias {

namespace {

Matrix inverse_spd(const Matrix& m, const char* what) {
    Eigen::LLT<Matrix> llt(m);
    if (llt.info() != Eigen::Success) {
        throw Error(ErrorCode::singular_matrix, std::string(what) + " is not positive definite");
    }
    Matrix inv = llt.solve(Matrix::Identity(m.rows(), m.cols()));
    return 0.5 * (inv + inv.transpose());
}

void check_sigma(double sigma) {
    if (!(sigma > 0.0) || !std::isfinite(sigma)) {
        throw Error(ErrorCode::invalid_argument, "noise standard deviation must be positive and finite");
    }
}

void check_dims(const GaussianPosterior& post, const Vector& phi) {
    if (post.mean.size() != phi.size() || post.cov.rows() != phi.size() || post.cov.cols() != phi.size()) {
        throw Error(ErrorCode::dimension_mismatch, "feature vector length " + std::to_string(phi.size()) +
                                                       " does not match posterior dimension " +
                                                       std::to_string(post.mean.size()));
    }
}

} // namespace

Vector poly_features(int degree, double x) {
    if (degree < 0) throw Error(ErrorCode::invalid_argument, "polynomial degree must be >= 0");
    if (!std::isfinite(x)) throw Error(ErrorCode::invalid_argument, "design must be finite");
    Vector phi(degree + 1);
    double power = 1.0;
    for (int j = 0; j <= degree; ++j) {
        phi(j) = power;
        power *= x;
    }
    return phi;
}

GaussianPosterior GaussianPosterior::from_prior(const PriorSpec& prior) {
    if (prior.kind != PriorSpec::Kind::normal) {
        throw Error(ErrorCode::invalid_argument, "conjugate posterior requires a normal prior");
    }
    return {prior.mean, prior.cov};
}

GaussianPosterior conjugate_update(const GaussianPosterior& post, double sigma, const Vector& phi, double y) {
    check_sigma(sigma);
    check_dims(post, phi);
    const double inv_var = 1.0 / (sigma * sigma);
    const Matrix prev_precision = inverse_spd(post.cov, "previous posterior covariance");
    const Matrix precision = prev_precision + inv_var * phi * phi.transpose();
    GaussianPosterior next;
    next.cov = inverse_spd(precision, "updated posterior precision");
    next.mean = next.cov * (prev_precision * post.mean + phi * (y * inv_var));
    return next;
}

double eig_linear(const GaussianPosterior& post, double sigma, const Vector& phi) {
    check_sigma(sigma);
    check_dims(post, phi);
    const double spread = phi.dot(post.cov * phi);
    return 0.5 * std::log(sigma * sigma + spread) - std::log(sigma);
}

NormalMoments posterior_predictive(const GaussianPosterior& post, double sigma, const Vector& phi) {
    check_sigma(sigma);
    check_dims(post, phi);
    return {post.mean.dot(phi), sigma * sigma + phi.dot(post.cov * phi)};
}

ParamVector ols_fit(const std::vector<double>& xs, const std::vector<double>& ys, int degree) {
    if (xs.size() != ys.size()) throw Error(ErrorCode::dimension_mismatch, "ols_fit: xs and ys differ in length");
    if (degree < 0) throw Error(ErrorCode::invalid_argument, "polynomial degree must be >= 0");
    const auto n = static_cast<Eigen::Index>(xs.size());
    Matrix design(n, degree + 1);
    Vector target(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        design.row(i) = poly_features(degree, xs[static_cast<std::size_t>(i)]).transpose();
        target(i) = ys[static_cast<std::size_t>(i)];
    }
    // Column scaling keeps the Vandermonde system well conditioned for x in the hundreds.
    Vector scale = design.colwise().norm().transpose();
    for (Eigen::Index j = 0; j < scale.size(); ++j) {
        if (scale(j) == 0.0) scale(j) = 1.0;
    }
    const Matrix scaled = design * scale.cwiseInverse().asDiagonal();
    Eigen::ColPivHouseholderQR<Matrix> qr(scaled);
    if (qr.rank() < degree + 1) {
        throw Error(ErrorCode::rank_deficient, "least-squares design matrix has rank " + std::to_string(qr.rank()) +
                                                   " < " + std::to_string(degree + 1));
    }
    return qr.solve(target).cwiseQuotient(scale);
}

ParamVector theta_star_ols(const TrueModel& truth, int degree, const TargetDistribution& domain) {
    if (domain.kind != TargetDistribution::Kind::uniform_continuous) {
        throw Error(ErrorCode::invalid_argument, "theta_star_ols needs a continuous target domain");
    }
    if (truth.spec.family != Family::gaussian_linear) {
        throw Error(ErrorCode::invalid_argument, "theta_star_ols needs a Gaussian polynomial true model");
    }
    const std::vector<double> xs = linspace(domain.lo, domain.hi, 1001);
    std::vector<double> ys;
    ys.reserve(xs.size());
    for (double x : xs) ys.push_back(truth.params.dot(poly_features(truth.spec.degree, x)));
    return ols_fit(xs, ys, degree);
}

double gaussian_kl(double mu_f, double sigma_f, double mu_m, double sigma_m) {
    if (!(sigma_f > 0.0) || !(sigma_m > 0.0)) {
        throw Error(ErrorCode::invalid_argument, "gaussian_kl needs positive standard deviations");
    }
    const double gap = mu_f - mu_m;
    return std::log(sigma_m / sigma_f) + (sigma_f * sigma_f + gap * gap) / (2.0 * sigma_m * sigma_m) - 0.5;
}

} // namespace adbias
