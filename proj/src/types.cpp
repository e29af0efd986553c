#include "adbias/types.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "adbias/error.hpp"

namespace adbias {

Design Design::scalar(double x) {
    Design d;
    d.value = Vector::Constant(1, x);
    return d;
}

Outcome Outcome::scalar(double y) {
    Outcome o;
    o.value = Vector::Constant(1, y);
    return o;
}

Outcome Outcome::binary(int y) {
    if (y != 0 && y != 1) {
        throw Error(ErrorCode::invalid_argument, "binary outcome must be 0 or 1, got " + std::to_string(y));
    }
    return scalar(static_cast<double>(y));
}

ParamSpace ParamSpace::unbounded(Eigen::Index dim) {
    const double inf = std::numeric_limits<double>::infinity();
    return {Vector::Constant(dim, -inf), Vector::Constant(dim, inf)};
}

ParamSpace ParamSpace::box(Vector lower, Vector upper) {
    if (lower.size() != upper.size()) {
        throw Error(ErrorCode::dimension_mismatch, "parameter bounds have different lengths");
    }
    for (Eigen::Index i = 0; i < lower.size(); ++i) {
        if (!(lower(i) <= upper(i))) {
            throw Error(ErrorCode::invalid_argument, "parameter lower bound exceeds upper bound at index " + std::to_string(i));
        }
    }
    return {std::move(lower), std::move(upper)};
}

bool ParamSpace::contains(const ParamVector& theta) const {
    if (theta.size() != dim()) return false;
    for (Eigen::Index i = 0; i < theta.size(); ++i) {
        if (!(theta(i) >= lower(i) && theta(i) <= upper(i))) return false;
    }
    return true;
}

PriorSpec PriorSpec::normal(Vector mean, Matrix cov) {
    if (cov.rows() != mean.size() || cov.cols() != mean.size()) {
        throw Error(ErrorCode::dimension_mismatch, "prior covariance shape does not match mean");
    }
    Eigen::LLT<Matrix> llt(cov);
    if (llt.info() != Eigen::Success) {
        throw Error(ErrorCode::singular_matrix, "prior covariance is not positive definite");
    }
    PriorSpec p;
    p.kind = Kind::normal;
    p.mean = std::move(mean);
    p.cov = std::move(cov);
    return p;
}

PriorSpec PriorSpec::diag_normal(Vector mean, const Vector& variances) {
    return normal(std::move(mean), variances.asDiagonal());
}

PriorSpec PriorSpec::uniform(Vector lower, Vector upper) {
    auto space = ParamSpace::box(std::move(lower), std::move(upper));
    for (Eigen::Index i = 0; i < space.dim(); ++i) {
        if (!std::isfinite(space.lower(i)) || !std::isfinite(space.upper(i)) || space.lower(i) >= space.upper(i)) {
            throw Error(ErrorCode::invalid_argument, "uniform prior needs a finite box with positive width");
        }
    }
    PriorSpec p;
    p.kind = Kind::uniform;
    p.lower = std::move(space.lower);
    p.upper = std::move(space.upper);
    return p;
}

Eigen::Index PriorSpec::dim() const {
    return kind == Kind::normal ? mean.size() : lower.size();
}

double PriorSpec::log_density(const ParamVector& theta) const {
    if (theta.size() != dim()) {
        throw Error(ErrorCode::dimension_mismatch, "parameter vector length does not match prior");
    }
    if (kind == Kind::uniform) {
        double log_volume = 0.0;
        for (Eigen::Index i = 0; i < theta.size(); ++i) {
            if (theta(i) < lower(i) || theta(i) > upper(i)) return -std::numeric_limits<double>::infinity();
            log_volume += std::log(upper(i) - lower(i));
        }
        return -log_volume;
    }
    Eigen::LLT<Matrix> llt(cov);
    const Vector z = llt.matrixL().solve(theta - mean);
    const Matrix& l = llt.matrixL();
    const double log_det = 2.0 * l.diagonal().array().log().sum();
    return -0.5 * (z.squaredNorm() + log_det + static_cast<double>(theta.size()) * std::log(2.0 * std::numbers::pi));
}

ParamVector PriorSpec::sample(Rng& rng) const {
    if (kind == Kind::uniform) {
        ParamVector theta(dim());
        for (Eigen::Index i = 0; i < theta.size(); ++i) {
            theta(i) = std::uniform_real_distribution<double>(lower(i), upper(i))(rng);
        }
        return theta;
    }
    std::normal_distribution<double> normal01(0.0, 1.0);
    Vector z(dim());
    for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = normal01(rng);
    Eigen::LLT<Matrix> llt(cov);
    return mean + llt.matrixL() * z;
}

ParamSpace PriorSpec::support() const {
    if (kind == Kind::uniform) return ParamSpace::box(lower, upper);
    return ParamSpace::unbounded(dim());
}

std::string_view to_string(Family family) {
    switch (family) {
        case Family::gaussian_linear: return "gaussian-linear";
        case Family::logistic_poly: return "logistic-poly";
        case Family::eut: return "eut";
        case Family::cpt: return "cpt";
    }
    return "unknown";
}

Family family_from_string(std::string_view name) {
    if (name == "gaussian-linear") return Family::gaussian_linear;
    if (name == "logistic-poly") return Family::logistic_poly;
    if (name == "eut") return Family::eut;
    if (name == "cpt") return Family::cpt;
    throw Error(ErrorCode::config, "unknown model family '" + std::string(name) + "'");
}

ModelSpec ModelSpec::gaussian_linear(int degree, double sigma, PriorSpec prior) {
    ModelSpec s;
    s.family = Family::gaussian_linear;
    s.degree = degree;
    s.noise = sigma;
    s.space = prior.support();
    s.prior = std::move(prior);
    s.validate();
    return s;
}

ModelSpec ModelSpec::logistic_poly(int degree, double epsilon, PriorSpec prior) {
    ModelSpec s = gaussian_linear(degree, epsilon, std::move(prior));
    s.family = Family::logistic_poly;
    return s;
}

ModelSpec ModelSpec::eut(double epsilon) {
    ModelSpec s;
    s.family = Family::eut;
    s.noise = epsilon;
    s.prior = PriorSpec::uniform(Vector::Constant(1, 0.0), Vector::Constant(1, 1.0));
    s.space = s.prior.support();
    s.validate();
    return s;
}

ModelSpec ModelSpec::cpt(double epsilon) {
    ModelSpec s;
    s.family = Family::cpt;
    s.noise = epsilon;
    s.prior = PriorSpec::uniform(Eigen::Vector3d(0.0, 0.0, 1.0), Eigen::Vector3d(1.0, 1.0, 2.0));
    s.space = s.prior.support();
    s.validate();
    return s;
}

Eigen::Index ModelSpec::param_dim() const {
    switch (family) {
        case Family::gaussian_linear:
        case Family::logistic_poly: return degree + 1;
        case Family::eut: return 1;
        case Family::cpt: return 3;
    }
    return 0;
}

void ModelSpec::validate() const {
    if (degree < 0) throw Error(ErrorCode::invalid_argument, "polynomial degree must be >= 0");
    if (!(noise > 0.0) || !std::isfinite(noise)) {
        throw Error(ErrorCode::invalid_argument, "noise setting (sigma or epsilon) must be positive and finite");
    }
    if (prior.dim() != param_dim()) {
        throw Error(ErrorCode::dimension_mismatch, "prior dimension " + std::to_string(prior.dim()) +
                                                       " does not match parameter dimension " + std::to_string(param_dim()));
    }
    if (space.dim() != param_dim()) {
        throw Error(ErrorCode::dimension_mismatch, "parameter space dimension does not match model family");
    }
}

TargetDistribution TargetDistribution::continuous(double lo, double hi) {
    TargetDistribution g;
    g.kind = Kind::uniform_continuous;
    g.lo = lo;
    g.hi = hi;
    g.validate();
    return g;
}

TargetDistribution TargetDistribution::discrete(std::vector<Design> designs) {
    TargetDistribution g;
    g.kind = Kind::uniform_discrete;
    g.designs = std::move(designs);
    g.validate();
    return g;
}

void TargetDistribution::validate() const {
    if (kind == Kind::uniform_continuous) {
        if (!(lo < hi) || !std::isfinite(lo) || !std::isfinite(hi)) {
            throw Error(ErrorCode::invalid_argument, "continuous target needs finite lo < hi");
        }
    } else if (designs.empty()) {
        throw Error(ErrorCode::invalid_argument, "discrete target needs at least one design");
    }
}

std::vector<double> linspace(double lo, double hi, int count) {
    if (count < 1) throw Error(ErrorCode::invalid_argument, "linspace needs count >= 1");
    std::vector<double> out(static_cast<std::size_t>(count));
    if (count == 1) {
        out[0] = lo;
        return out;
    }
    const double step = (hi - lo) / static_cast<double>(count - 1);
    for (int i = 0; i < count; ++i) out[static_cast<std::size_t>(i)] = lo + step * i;
    out.back() = hi;
    return out;
}

std::vector<Design> design_grid(const TargetDistribution& g, int grid_points) {
    if (g.kind == TargetDistribution::Kind::uniform_discrete) return g.designs;
    std::vector<Design> grid;
    grid.reserve(static_cast<std::size_t>(grid_points));
    for (double x : linspace(g.lo, g.hi, grid_points)) grid.push_back(Design::scalar(x));
    return grid;
}

} // namespace adbias
