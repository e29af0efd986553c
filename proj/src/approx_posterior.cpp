#include "adbias/approx_posterior.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "adbias/binary_models.hpp"
#include "adbias/error.hpp"
#include "adbias/likelihood.hpp"

namespace adbias {

namespace {

constexpr double kNegligibleLogWeight = -36.841361487904734;  // log(1e-16)

std::string describe(const Design& x, const Outcome& y) {
    std::string s = "observation (x=[";
    for (Eigen::Index i = 0; i < x.value.size(); ++i) s += (i ? ", " : "") + std::to_string(x.value(i));
    return s + "], y=" + std::to_string(y.y()) + ")";
}

Vector normalize_or_throw(const Vector& log_weights, ErrorCode code, const std::string& what) {
    const double top = log_weights.size() ? log_weights.maxCoeff() : -std::numeric_limits<double>::infinity();
    if (!std::isfinite(top)) throw Error(code, what);
    return normalize_log_weights(log_weights);
}

Eigen::ArrayXd prior_log_density_columns(const PriorSpec& prior, const Matrix& samples) {
    const Eigen::Index n = samples.cols();
    Eigen::ArrayXd out(n);
    if (prior.kind == PriorSpec::Kind::uniform) {
        const double log_volume = (prior.upper - prior.lower).array().log().sum();
        for (Eigen::Index i = 0; i < n; ++i) {
            const bool inside = ((samples.col(i) - prior.lower).array() >= 0.0).all() &&
                                ((prior.upper - samples.col(i)).array() >= 0.0).all();
            out(i) = inside ? -log_volume : -std::numeric_limits<double>::infinity();
        }
        return out;
    }
    Eigen::LLT<Matrix> llt(prior.cov);
    const Matrix l = llt.matrixL();
    const Matrix z = l.triangularView<Eigen::Lower>().solve(samples.colwise() - prior.mean);
    const double log_det = 2.0 * l.diagonal().array().log().sum();
    const double constant = -0.5 * (log_det + static_cast<double>(samples.rows()) * std::log(2.0 * std::numbers::pi));
    return constant - 0.5 * z.colwise().squaredNorm().transpose().array();
}

Vector prior_variances(const PriorSpec& prior) {
    if (prior.kind == PriorSpec::Kind::uniform) return (prior.upper - prior.lower).array().square() / 12.0;
    return prior.cov.diagonal();
}

} // namespace

double log_sum_exp(const Eigen::ArrayXd& values) {
    if (values.size() == 0) return -std::numeric_limits<double>::infinity();
    const double top = values.maxCoeff();
    if (!std::isfinite(top)) return top;
    return top + std::log((values - top).exp().sum());
}

Vector normalize_log_weights(const Vector& log_weights) {
    const double total = log_sum_exp(log_weights.array());
    if (!std::isfinite(total)) {
        throw Error(ErrorCode::weight_underflow, "cannot normalize weights: total weight is zero or non-finite");
    }
    return (log_weights.array() - total).matrix();
}

double effective_sample_size(const Vector& log_weights) {
    return 1.0 / (2.0 * log_weights.array()).exp().sum();
}

GridPosterior GridPosterior::lattice(const ModelSpec& spec, int points_per_dim) {
    if (points_per_dim < 1) throw Error(ErrorCode::invalid_argument, "lattice needs at least one point per dimension");
    const Eigen::Index d = spec.param_dim();
    for (Eigen::Index k = 0; k < d; ++k) {
        if (!std::isfinite(spec.space.lower(k)) || !std::isfinite(spec.space.upper(k))) {
            throw Error(ErrorCode::invalid_argument, "grid posterior needs a bounded parameter space");
        }
    }
    Eigen::Index total = 1;
    for (Eigen::Index k = 0; k < d; ++k) total *= points_per_dim;
    Matrix points(d, total);
    std::vector<std::vector<double>> axes;
    for (Eigen::Index k = 0; k < d; ++k) axes.push_back(linspace(spec.space.lower(k), spec.space.upper(k), points_per_dim));
    for (Eigen::Index c = 0; c < total; ++c) {
        Eigen::Index rest = c;
        for (Eigen::Index k = d - 1; k >= 0; --k) {
            points(k, c) = axes[static_cast<std::size_t>(k)][static_cast<std::size_t>(rest % points_per_dim)];
            rest /= points_per_dim;
        }
    }
    const Vector log_prior = prior_log_density_columns(spec.prior, points).matrix();
    return from_points(std::move(points), log_prior);
}

GridPosterior GridPosterior::from_points(Matrix points, Vector log_weights) {
    if (points.cols() != log_weights.size() || points.cols() == 0) {
        throw Error(ErrorCode::dimension_mismatch, "grid posterior needs one log-weight per lattice point");
    }
    GridPosterior g;
    g.points = std::move(points);
    g.log_weights = normalize_log_weights(log_weights);
    return g;
}

GridPosterior GridPosterior::point_mass(const ParamVector& theta) {
    return from_points(Matrix(theta), Vector::Zero(1));
}

GridPosterior grid_update(const GridPosterior& post, const ModelSpec& spec, const Design& x, const Outcome& y) {
    const Eigen::ArrayXd ll = log_likelihoods(spec, post.points, x, y);
    GridPosterior next;
    next.points = post.points;
    next.log_weights = normalize_or_throw((post.log_weights.array() + ll).matrix(), ErrorCode::zero_evidence,
                                          "all lattice points give zero likelihood to " + describe(x, y));
    return next;
}

ParticlePosterior particle_init(const ModelSpec& spec, int count, std::uint64_t seed) {
    if (count < 1) throw Error(ErrorCode::invalid_argument, "particle posterior needs at least one sample");
    Rng rng(seed);
    ParticlePosterior post;
    post.samples.resize(spec.param_dim(), count);
    for (int i = 0; i < count; ++i) post.samples.col(i) = spec.prior.sample(rng);
    post.log_weights = Vector::Constant(count, -std::log(static_cast<double>(count)));
    post.log_target = prior_log_density_columns(spec.prior, post.samples).matrix();
    post.bandwidth = Vector::Zero(spec.param_dim());
    return post;
}

ParticlePosterior particle_reweight(const ParticlePosterior& post, const ModelSpec& spec, const Design& x,
                                    const Outcome& y) {
    const Eigen::ArrayXd ll = log_likelihoods(spec, post.samples, x, y);
    ParticlePosterior next = post;
    next.log_weights =
        normalize_or_throw((post.log_weights.array() + ll).matrix(), ErrorCode::weight_underflow,
                           "all particles give zero likelihood at step " + std::to_string(post.history.size() + 1) +
                               " to " + describe(x, y));
    next.log_target = (post.log_target.array() + ll).matrix();
    next.history.push_back({x, y});
    return next;
}

ParticlePosterior particle_refresh(const ParticlePosterior& post, const ModelSpec& spec, std::uint64_t seed) {
    const Eigen::Index d = post.samples.rows();
    const Eigen::Index n = post.samples.cols();
    const auto step = static_cast<int>(post.history.size());

    // Kernel mixture components: samples with non-negligible weight.
    std::vector<Eigen::Index> active;
    for (Eigen::Index i = 0; i < n; ++i) {
        if (post.log_weights(i) > kNegligibleLogWeight) active.push_back(i);
    }
    const auto m = static_cast<Eigen::Index>(active.size());
    Matrix centres(d, m);
    Eigen::ArrayXd comp_log_w(m);
    for (Eigen::Index j = 0; j < m; ++j) {
        centres.col(j) = post.samples.col(active[static_cast<std::size_t>(j)]);
        comp_log_w(j) = post.log_weights(active[static_cast<std::size_t>(j)]);
    }
    comp_log_w -= log_sum_exp(comp_log_w);
    const Eigen::ArrayXd comp_w = comp_log_w.exp();

    const Vector mean = centres * comp_w.matrix();
    const Matrix centred = centres.colwise() - mean;
    Matrix cov = centred * comp_w.matrix().asDiagonal() * centred.transpose();
    cov = 0.5 * (cov + cov.transpose());

    const double n_eff = std::max(1.0, effective_sample_size(post.log_weights));
    const double factor = std::pow(n_eff, -2.0 / static_cast<double>(d + 4));
    Matrix kernel_cov = factor * cov;
    kernel_cov.diagonal() += 1e-12 * prior_variances(spec.prior);
    Eigen::LLT<Matrix> llt(kernel_cov);
    if (llt.info() != Eigen::Success) {
        throw Error(ErrorCode::singular_matrix, "KDE kernel covariance is not positive definite",
                    ErrorContext{std::nullopt, std::nullopt, step});
    }
    const Matrix chol = llt.matrixL();
    const Matrix whitened_centres = chol.triangularView<Eigen::Lower>().solve(centres);

    // Draw from the mixture: pick a component, then add whitened Gaussian noise.
    Rng rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> normal01(0.0, 1.0);
    std::vector<double> cumulative(static_cast<std::size_t>(m));
    double running = 0.0;
    for (Eigen::Index j = 0; j < m; ++j) cumulative[static_cast<std::size_t>(j)] = running += comp_w(j);

    const bool bounded = (spec.space.lower.array().isFinite()).any() || (spec.space.upper.array().isFinite()).any();
    Matrix fresh(d, n);
    Matrix fresh_whitened(d, n);
    std::vector<Eigen::Index> parent(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) {
        const double u = unit(rng) * running;
        auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
        const Eigen::Index j = std::min<Eigen::Index>(it - cumulative.begin(), m - 1);
        parent[static_cast<std::size_t>(i)] = j;
        Vector z(d);
        Vector theta(d);
        // Out-of-bounds draws are redrawn from the same kernel, then clamped as a last resort.
        for (int attempt = 0; attempt < 100; ++attempt) {
            for (Eigen::Index k = 0; k < d; ++k) z(k) = normal01(rng);
            theta = centres.col(j) + chol * z;
            if (!bounded || spec.space.contains(theta)) break;
        }
        if (bounded && !spec.space.contains(theta)) {
            theta = theta.cwiseMax(spec.space.lower).cwiseMin(spec.space.upper);
        }
        fresh.col(i) = theta;
        fresh_whitened.col(i) = chol.triangularView<Eigen::Lower>().solve(theta);
    }

    // Exact unnormalized log posterior of each fresh sample.
    Eigen::ArrayXd log_target = prior_log_density_columns(spec.prior, fresh);
    for (const auto& obs : post.history) log_target += log_likelihoods(spec, fresh, obs.x, obs.y);

    // log q(theta) of the kernel mixture, referenced to the parent component's term.
    const double log_norm =
        -0.5 * static_cast<double>(d) * std::log(2.0 * std::numbers::pi) - chol.diagonal().array().log().sum();
    Eigen::ArrayXd log_q(n);
    Eigen::ArrayXd terms(m);
    for (Eigen::Index i = 0; i < n; ++i) {
        terms = comp_log_w;
        for (Eigen::Index k = 0; k < d; ++k) {
            terms -= 0.5 * (whitened_centres.row(k).transpose().array() - fresh_whitened(k, i)).square();
        }
        const double ref = terms(parent[static_cast<std::size_t>(i)]);
        double total = (terms - ref).exp().sum();
        double shift = ref;
        if (!std::isfinite(total)) {
            shift = terms.maxCoeff();
            total = (terms - shift).exp().sum();
        }
        log_q(i) = shift + std::log(total) + log_norm;
    }

    ParticlePosterior next;
    next.samples = std::move(fresh);
    next.log_target = log_target.matrix();
    next.log_weights = normalize_or_throw((log_target - log_q).matrix(), ErrorCode::weight_underflow,
                                          "importance weights underflowed at step " + std::to_string(step));
    next.bandwidth = kernel_cov.diagonal().cwiseSqrt();
    next.history = post.history;
    next.refreshes = post.refreshes + 1;
    return next;
}

ParticlePosterior particle_step(const ParticlePosterior& post, const ModelSpec& spec, const Design& x,
                                const Outcome& y, std::uint64_t seed) {
    return particle_refresh(particle_reweight(post, spec, x, y), spec, seed);
}

double posterior_expectation(const GridPosterior& post, const ParamFunction& h) {
    double total = 0.0;
    for (Eigen::Index i = 0; i < post.size(); ++i) total += std::exp(post.log_weights(i)) * h(post.points.col(i));
    return total;
}

double posterior_expectation(const ParticlePosterior& post, const ParamFunction& h) {
    double total = 0.0;
    for (Eigen::Index i = 0; i < post.size(); ++i) total += std::exp(post.log_weights(i)) * h(post.samples.col(i));
    return total;
}

BinaryPredictive binary_predictive(const Matrix& points, const Vector& log_weights, const ModelSpec& spec,
                                   const std::vector<Design>& designs, bool with_entropy) {
    if (!spec.is_binary()) throw Error(ErrorCode::invalid_argument, "binary_predictive needs a binary family");
    std::vector<Eigen::Index> active;
    for (Eigen::Index i = 0; i < log_weights.size(); ++i) {
        if (log_weights(i) > kNegligibleLogWeight) active.push_back(i);
    }
    const auto m = static_cast<Eigen::Index>(active.size());
    Matrix pts(points.rows(), m);
    Eigen::ArrayXd lw(m);
    for (Eigen::Index j = 0; j < m; ++j) {
        pts.col(j) = points.col(active[static_cast<std::size_t>(j)]);
        lw(j) = log_weights(active[static_cast<std::size_t>(j)]);
    }
    lw -= log_sum_exp(lw);
    const Eigen::ArrayXd w = lw.exp();

    const auto nd = static_cast<Eigen::Index>(designs.size());
    BinaryPredictive out;
    out.log_p1.resize(nd);
    out.log_p0.resize(nd);
    if (with_entropy) out.mean_entropy.resize(nd);
    for (Eigen::Index j = 0; j < nd; ++j) {
        const Eigen::ArrayXd z = binary_logits(spec, pts, designs[static_cast<std::size_t>(j)]);
        const Eigen::ArrayXd e = (-z.abs()).exp();
        const Eigen::ArrayXd inv = (1.0 + e).inverse();
        const Eigen::ArrayXd p1 = (z >= 0.0).select(inv, e * inv);
        const Eigen::ArrayXd p0 = (z >= 0.0).select(e * inv, inv);
        const double pbar1 = (w * p1).sum();
        const double pbar0 = (w * p0).sum();
        const bool exact = pbar1 > 1e-300 && pbar0 > 1e-300;
        if (exact && !with_entropy) {
            out.log_p1(j) = std::max(std::log(pbar1), kLogProbFloor);
            out.log_p0(j) = std::max(std::log(pbar0), kLogProbFloor);
            continue;
        }
        const Eigen::ArrayXd tail = e.log1p();
        const Eigen::ArrayXd lp1 = (-((-z).max(0.0) + tail)).max(kLogProbFloor);
        const Eigen::ArrayXd lp0 = (-(z.max(0.0) + tail)).max(kLogProbFloor);
        out.log_p1(j) = std::max(pbar1 > 1e-300 ? std::log(pbar1) : log_sum_exp(lw + lp1), kLogProbFloor);
        out.log_p0(j) = std::max(pbar0 > 1e-300 ? std::log(pbar0) : log_sum_exp(lw + lp0), kLogProbFloor);
        if (with_entropy) out.mean_entropy(j) = -(w * (p1 * lp1 + p0 * lp0)).sum();
    }
    return out;
}

LatticeTable lattice_table(const Matrix& points, const ModelSpec& spec, const std::vector<Design>& designs) {
    if (!spec.is_binary()) throw Error(ErrorCode::invalid_argument, "lattice_table needs a binary family");
    const Eigen::Index n = points.cols();
    const auto nd = static_cast<Eigen::Index>(designs.size());
    LatticeTable t;
    t.p1.resize(n, nd);
    t.p0.resize(n, nd);
    t.log_p1.resize(n, nd);
    t.log_p0.resize(n, nd);
    t.entropy.resize(n, nd);
    for (Eigen::Index j = 0; j < nd; ++j) {
        const Eigen::ArrayXd z = binary_logits(spec, points, designs[static_cast<std::size_t>(j)]);
        const Eigen::ArrayXd e = (-z.abs()).exp();
        const Eigen::ArrayXd tail = e.log1p();
        const Eigen::ArrayXd inv = (1.0 + e).inverse();
        const Eigen::ArrayXd p1 = (z >= 0.0).select(inv, e * inv);
        const Eigen::ArrayXd p0 = (z >= 0.0).select(e * inv, inv);
        const Eigen::ArrayXd lp1 = (-((-z).max(0.0) + tail)).max(kLogProbFloor);
        const Eigen::ArrayXd lp0 = (-(z.max(0.0) + tail)).max(kLogProbFloor);
        t.p1.col(j) = p1.matrix();
        t.p0.col(j) = p0.matrix();
        t.log_p1.col(j) = lp1.matrix();
        t.log_p0.col(j) = lp0.matrix();
        t.entropy.col(j) = (-(p1 * lp1 + p0 * lp0)).matrix();
    }
    return t;
}

BinaryPredictive binary_predictive(const LatticeTable& table, const Vector& log_weights, bool with_entropy) {
    if (table.p1.rows() != log_weights.size()) {
        throw Error(ErrorCode::dimension_mismatch, "lattice table and weights differ in size");
    }
    const Vector w = (log_weights.array() > kNegligibleLogWeight).select(log_weights.array().exp(), 0.0).matrix();
    const double total = w.sum();
    const Eigen::ArrayXd pbar1 = (table.p1.transpose() * w).array() / total;
    const Eigen::ArrayXd pbar0 = (table.p0.transpose() * w).array() / total;
    const auto nd = table.p1.cols();
    BinaryPredictive out;
    out.log_p1.resize(nd);
    out.log_p0.resize(nd);
    for (Eigen::Index j = 0; j < nd; ++j) {
        const double p1 = pbar1(j);
        const double p0 = pbar0(j);
        out.log_p1(j) = std::max(p1 > 1e-300 ? std::log(p1) : log_sum_exp(log_weights.array() + table.log_p1.col(j).array()),
                                 kLogProbFloor);
        out.log_p0(j) = std::max(p0 > 1e-300 ? std::log(p0) : log_sum_exp(log_weights.array() + table.log_p0.col(j).array()),
                                 kLogProbFloor);
    }
    if (with_entropy) out.mean_entropy = (table.entropy.transpose() * w).array() / total;
    return out;
}

} // namespace adbias
