#include "adbias/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "adbias/binary_models.hpp"
#include "adbias/design_select.hpp"
#include "adbias/error.hpp"
#include "adbias/likelihood.hpp"

namespace adbias {

namespace {

void check_risk(double value, const Design& x) {
    if (!std::isfinite(value)) {
        std::string where = "[";
        for (Eigen::Index i = 0; i < x.value.size(); ++i) where += (i ? ", " : "") + std::to_string(x.value(i));
        throw Error(ErrorCode::non_finite_risk, "non-finite log density at design " + where + "]");
    }
}

double cross_entropy(double true_logit, double log_p1, double log_p0) {
    const double p1 = std::exp(log_sigmoid(true_logit));
    const double p0 = std::exp(log_sigmoid(-true_logit));
    return -(p1 * log_p1 + p0 * log_p0);
}

const Matrix& weighted_points(const Posterior& posterior, const Vector*& log_weights) {
    if (const auto* g = std::get_if<GridPosterior>(&posterior)) {
        log_weights = &g->log_weights;
        return g->points;
    }
    if (const auto* p = std::get_if<ParticlePosterior>(&posterior)) {
        log_weights = &p->log_weights;
        return p->samples;
    }
    throw Error(ErrorCode::invalid_argument, "binary risk needs a grid or particle posterior");
}

} // namespace

EvalSet make_regression_eval(const TrueModel& truth, const TargetDistribution& g, int size, std::uint64_t seed) {
    if (size < 1) throw Error(ErrorCode::invalid_argument, "evaluation set needs at least one point");
    Rng rng(seed);
    EvalSet eval;
    eval.seed = seed;
    for (int i = 0; i < size; ++i) {
        Design x = sample_random(g, rng).design;
        eval.outcomes.push_back(sample_outcome(truth, x, rng));
        eval.designs.push_back(std::move(x));
    }
    return eval;
}

EvalSet make_binary_eval(const TrueModel& truth, std::vector<Design> designs) {
    if (designs.empty()) throw Error(ErrorCode::invalid_argument, "evaluation set needs at least one design");
    EvalSet eval;
    for (const auto& x : designs) eval.true_logits.push_back(binary_logit(truth.spec, truth.params, x));
    eval.designs = std::move(designs);
    return eval;
}

double risk_from_predictive(const BinaryPredictive& table, const EvalSet& eval) {
    if (table.log_p1.size() != static_cast<Eigen::Index>(eval.size())) {
        throw Error(ErrorCode::dimension_mismatch, "predictive table does not cover the evaluation designs");
    }
    double total = 0.0;
    for (std::size_t j = 0; j < eval.size(); ++j) {
        const auto jj = static_cast<Eigen::Index>(j);
        const double ce = cross_entropy(eval.true_logits[j], table.log_p1(jj), table.log_p0(jj));
        check_risk(ce, eval.designs[j]);
        total += ce;
    }
    return total / static_cast<double>(eval.size());
}

double risk_nll(const Posterior& posterior, const ModelSpec& spec, const EvalSet& eval) {
    if (eval.size() == 0) throw Error(ErrorCode::invalid_argument, "evaluation set is empty");
    if (eval.is_binary()) {
        const Vector* log_weights = nullptr;
        const Matrix& points = weighted_points(posterior, log_weights);
        return risk_from_predictive(binary_predictive(points, *log_weights, spec, eval.designs, false), eval);
    }
    double total = 0.0;
    for (std::size_t i = 0; i < eval.size(); ++i) {
        const double lp = predictive_log_density(posterior, spec, eval.designs[i], eval.outcomes[i]);
        check_risk(lp, eval.designs[i]);
        total -= lp;
    }
    return total / static_cast<double>(eval.size());
}

double risk_nll(const ParamVector& theta, const ModelSpec& spec, const EvalSet& eval) {
    if (eval.size() == 0) throw Error(ErrorCode::invalid_argument, "evaluation set is empty");
    double total = 0.0;
    for (std::size_t i = 0; i < eval.size(); ++i) {
        double term;
        if (eval.is_binary()) {
            const double z = binary_logit(spec, theta, eval.designs[i]);
            term = cross_entropy(eval.true_logits[i], clamped_log_sigmoid(z), clamped_log_sigmoid(-z));
        } else {
            term = -log_likelihood(spec, theta, eval.designs[i], eval.outcomes[i]);
        }
        check_risk(term, eval.designs[i]);
        total += term;
    }
    return total / static_cast<double>(eval.size());
}

double true_model_risk(const TrueModel& truth, const EvalSet& eval) {
    if (!eval.is_binary()) return risk_nll(truth.params, truth.spec, eval);
    double total = 0.0;
    for (double z : eval.true_logits) total += bernoulli_entropy_logit(z);
    return total / static_cast<double>(eval.size());
}

double d_model(const TrueModel& truth, const ParamVector& theta_ref, const ModelSpec& spec, const TargetDistribution& g,
               int grid_points) {
    if (truth.spec.is_binary() != spec.is_binary()) {
        throw Error(ErrorCode::invalid_argument, "true model and model class disagree on the outcome type");
    }
    const std::vector<Design> grid = design_grid(g, grid_points);
    double total = 0.0;
    for (const auto& x : grid) {
        if (spec.is_binary()) {
            total += bernoulli_kl_logits(binary_logit(truth.spec, truth.params, x), binary_logit(spec, theta_ref, x));
        } else {
            total += gaussian_kl(mean_response(truth.spec, truth.params, x), truth.spec.noise,
                                 mean_response(spec, theta_ref, x), spec.noise);
        }
    }
    return total / static_cast<double>(grid.size());
}

double d_model_predictive(const TrueModel& truth, const Posterior& posterior, const ModelSpec& spec,
                          const TargetDistribution& g, int grid_points) {
    if (!spec.is_binary() || !truth.spec.is_binary()) {
        throw Error(ErrorCode::invalid_argument, "predictive D_model approximation is defined for binary families");
    }
    const std::vector<Design> grid = design_grid(g, grid_points);
    const Vector* log_weights = nullptr;
    const Matrix& points = weighted_points(posterior, log_weights);
    const BinaryPredictive table = binary_predictive(points, *log_weights, spec, grid, false);
    double total = 0.0;
    for (std::size_t j = 0; j < grid.size(); ++j) {
        const auto jj = static_cast<Eigen::Index>(j);
        const double z = binary_logit(truth.spec, truth.params, grid[j]);
        const double lp1 = log_sigmoid(z);
        const double lp0 = log_sigmoid(-z);
        total += std::max(0.0, std::exp(lp1) * (lp1 - table.log_p1(jj)) + std::exp(lp0) * (lp0 - table.log_p0(jj)));
    }
    return total / static_cast<double>(grid.size());
}

ParamVector theta_star_grid(const TrueModel& truth, const ModelSpec& spec, const Matrix& lattice,
                            const std::vector<Design>& designs) {
    if (lattice.cols() == 0 || designs.empty()) throw Error(ErrorCode::invalid_argument, "empty lattice or design list");
    Eigen::ArrayXd risk = Eigen::ArrayXd::Zero(lattice.cols());
    for (const auto& x : designs) {
        const double zt = binary_logit(truth.spec, truth.params, x);
        const double p1 = std::exp(log_sigmoid(zt));
        const double p0 = std::exp(log_sigmoid(-zt));
        const Eigen::ArrayXd z = binary_logits(spec, lattice, x);
        for (Eigen::Index i = 0; i < z.size(); ++i) {
            risk(i) -= p1 * clamped_log_sigmoid(z(i)) + p0 * clamped_log_sigmoid(-z(i));
        }
    }
    Eigen::Index best = 0;
    risk.minCoeff(&best);
    return lattice.col(best);
}

double alb(double risk_adaptive, double risk_star) {
    if (!(risk_star > 0.0)) throw Error(ErrorCode::invalid_argument, "ALB needs a positive reference risk");
    return risk_adaptive / risk_star - 1.0;
}

double alb_vs_passive(double risk_adaptive, double risk_passive, double scale) {
    if (!(risk_passive > 0.0)) throw Error(ErrorCode::invalid_argument, "ALB needs a positive passive-learning risk");
    return scale * (risk_adaptive / risk_passive - 1.0);
}

std::vector<double> average_ranks(std::span<const double> values) {
    const std::size_t n = values.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    std::vector<double> ranks(n);
    for (std::size_t i = 0; i < n;) {
        std::size_t j = i;
        while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
        const double mean_rank = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = mean_rank;
        i = j + 1;
    }
    return ranks;
}

namespace {

double pearson(const std::vector<double>& a, const std::vector<double>& b) {
    const double n = static_cast<double>(a.size());
    const double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
    const double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        sab += (a[i] - ma) * (b[i] - mb);
        saa += (a[i] - ma) * (a[i] - ma);
        sbb += (b[i] - mb) * (b[i] - mb);
    }
    if (saa == 0.0 || sbb == 0.0) throw Error(ErrorCode::invalid_argument, "rank correlation undefined: zero rank variance");
    return sab / std::sqrt(saa * sbb);
}

void check_pairs(std::span<const double> xs, std::span<const double> ys) {
    if (xs.size() != ys.size()) throw Error(ErrorCode::dimension_mismatch, "spearman needs equal-length inputs");
    if (xs.size() < 3) throw Error(ErrorCode::invalid_argument, "spearman needs at least 3 pairs");
}

} // namespace

double spearman(std::span<const double> xs, std::span<const double> ys) {
    check_pairs(xs, ys);
    return std::clamp(pearson(average_ranks(xs), average_ranks(ys)), -1.0, 1.0);
}

double spearman_permutation_pvalue(std::span<const double> xs, std::span<const double> ys, int permutations,
                                   std::uint64_t seed) {
    check_pairs(xs, ys);
    if (permutations < 1) throw Error(ErrorCode::invalid_argument, "need at least one permutation");
    const std::vector<double> rx = average_ranks(xs);
    std::vector<double> ry = average_ranks(ys);
    const double observed = pearson(rx, ry);
    Rng rng(seed);
    int at_least = 0;
    for (int p = 0; p < permutations; ++p) {
        std::shuffle(ry.begin(), ry.end(), rng);
        if (pearson(rx, ry) >= observed - 1e-12) ++at_least;
    }
    return (1.0 + at_least) / (1.0 + permutations);
}

} // namespace adbias
