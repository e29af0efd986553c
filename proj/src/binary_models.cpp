#include "adbias/binary_models.hpp"

#include <algorithm>
#include <cmath>

#include "adbias/error.hpp"
#include "adbias/linreg.hpp"

namespace adbias {

double log_sigmoid(double z) {
    if (z >= 0.0) return -std::log1p(std::exp(-z));
    return z - std::log1p(std::exp(z));
}

double clamped_log_sigmoid(double z) {
    return std::max(log_sigmoid(z), kLogProbFloor);
}

void Gamble::validate() const {
    if (!(p > 0.0 && p < 1.0)) throw Error(ErrorCode::invalid_argument, "gamble probability must lie in (0,1)");
    if (!(gain > 0.0) || !std::isfinite(gain)) throw Error(ErrorCode::invalid_argument, "gamble gain must be > 0");
    if (!(loss < 0.0) || !std::isfinite(loss)) throw Error(ErrorCode::invalid_argument, "gamble loss must be < 0");
}

Design Gamble::to_design() const {
    return Design{Eigen::Vector3d(p, gain, loss)};
}

Gamble Gamble::from_design(const Design& d) {
    if (d.dim() != 3) {
        throw Error(ErrorCode::dimension_mismatch, "gamble design needs 3 entries (p, G, L), got " + std::to_string(d.dim()));
    }
    return {d.value(0), d.value(1), d.value(2)};
}

std::vector<Design> GambleDesignSpace::designs() const {
    std::vector<Design> out;
    out.reserve(gambles.size());
    for (const auto& g : gambles) out.push_back(g.to_design());
    return out;
}

double logistic_choice_prob(double epsilon, double value) {
    if (!(epsilon > 0.0)) throw Error(ErrorCode::invalid_argument, "choice sensitivity must be > 0");
    const double z = epsilon * value;
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

double eut_value(const EutParams& params, const Gamble& g) {
    return g.p * std::pow(g.gain, params.alpha) - (1.0 - g.p) * std::pow(-g.loss, params.alpha);
}

double prelec_weight(double gamma, double p) {
    if (!(p > 0.0 && p <= 1.0)) {
        throw Error(ErrorCode::invalid_argument, "Prelec weight needs p in (0,1], got " + std::to_string(p));
    }
    if (!(gamma >= 0.0)) throw Error(ErrorCode::invalid_argument, "Prelec exponent must be >= 0");
    return std::exp(-std::pow(-std::log(p), gamma));
}

double cpt_value(const CptParams& params, const Gamble& g) {
    return prelec_weight(params.gamma, g.p) * std::pow(g.gain, params.alpha) -
           prelec_weight(params.gamma, 1.0 - g.p) * params.loss_aversion * std::pow(-g.loss, params.alpha);
}

double classify_prob(const Vector& beta, double epsilon, double x) {
    if (beta.size() == 0) throw Error(ErrorCode::dimension_mismatch, "classifier needs at least one coefficient");
    const double logit = beta.dot(poly_features(static_cast<int>(beta.size()) - 1, x));
    return logistic_choice_prob(epsilon, logit);
}

GambleDesignSpace generate_gamble_space(std::uint64_t seed, int count) {
    if (count < 1) throw Error(ErrorCode::invalid_argument, "gamble space needs at least one gamble");
    Rng rng(seed);
    std::uniform_real_distribution<double> prob(0.05, 0.95);
    std::uniform_real_distribution<double> gain(1.0, 100.0);
    std::uniform_real_distribution<double> loss(-100.0, -1.0);
    GambleDesignSpace space;
    space.seed = seed;
    space.gambles.reserve(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) {
        Gamble g;
        g.p = prob(rng);
        g.gain = gain(rng);
        g.loss = loss(rng);
        space.gambles.push_back(g);
    }
    return space;
}

double bernoulli_kl(double p_true, double p_model) {
    if (!(p_true >= 0.0 && p_true <= 1.0) || !(p_model >= 0.0 && p_model <= 1.0)) {
        throw Error(ErrorCode::invalid_argument, "bernoulli_kl needs probabilities in [0,1]");
    }
    double kl = 0.0;
    if (p_true > 0.0) {
        if (p_model == 0.0) throw Error(ErrorCode::infinite_divergence, "model assigns zero probability to y=1");
        kl += p_true * std::log(p_true / p_model);
    }
    if (p_true < 1.0) {
        if (p_model == 1.0) throw Error(ErrorCode::infinite_divergence, "model assigns zero probability to y=0");
        kl += (1.0 - p_true) * std::log((1.0 - p_true) / (1.0 - p_model));
    }
    return std::max(kl, 0.0);
}

double bernoulli_kl_logits(double logit_true, double logit_model) {
    const double p1 = std::exp(log_sigmoid(logit_true));
    const double p0 = std::exp(log_sigmoid(-logit_true));
    double kl = 0.0;
    if (p1 > 0.0) kl += p1 * (log_sigmoid(logit_true) - clamped_log_sigmoid(logit_model));
    if (p0 > 0.0) kl += p0 * (log_sigmoid(-logit_true) - clamped_log_sigmoid(-logit_model));
    return std::max(kl, 0.0);
}

double bernoulli_entropy_logit(double z) {
    const double lp1 = log_sigmoid(z);
    const double lp0 = log_sigmoid(-z);
    return -(std::exp(lp1) * lp1 + std::exp(lp0) * lp0);
}

namespace {

// Coefficients c of sum_j c_j u^j with u = (x - centre) / scale, re-expressed in powers of x.
Vector unscale_polynomial(const Vector& c, double centre, double scale) {
    const Eigen::Index n = c.size();
    Vector out = Vector::Zero(n);
    for (Eigen::Index j = 0; j < n; ++j) {
        // (x - centre)^j / scale^j = sum_i binom(j,i) x^i (-centre)^(j-i) / scale^j
        double binom = 1.0;
        for (Eigen::Index i = 0; i <= j; ++i) {
            if (i > 0) binom = binom * static_cast<double>(j - i + 1) / static_cast<double>(i);
            out(i) += c(j) * binom * std::pow(-centre, static_cast<double>(j - i)) / std::pow(scale, static_cast<double>(j));
        }
    }
    return out;
}

} // namespace

ParamVector theta_star_logistic(const std::vector<double>& xs, const std::vector<double>& target_logits, int degree,
                                double epsilon) {
    if (xs.size() != target_logits.size() || xs.empty()) {
        throw Error(ErrorCode::dimension_mismatch, "theta_star_logistic: xs and logits must be non-empty and equal length");
    }
    if (!(epsilon > 0.0)) throw Error(ErrorCode::invalid_argument, "choice sensitivity must be > 0");
    const auto n = static_cast<Eigen::Index>(xs.size());
    const auto [lo_it, hi_it] = std::minmax_element(xs.begin(), xs.end());
    const double centre = 0.5 * (*lo_it + *hi_it);
    const double scale = *hi_it > *lo_it ? 0.5 * (*hi_it - *lo_it) : 1.0;

    Matrix features(n, degree + 1);
    Vector target(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        features.row(i) = poly_features(degree, (xs[static_cast<std::size_t>(i)] - centre) / scale).transpose();
        target(i) = std::exp(log_sigmoid(target_logits[static_cast<std::size_t>(i)]));
    }

    auto loss = [&](const Vector& c) {
        const Vector z = epsilon * (features * c);
        double total = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            total -= target(i) * log_sigmoid(z(i)) + (1.0 - target(i)) * log_sigmoid(-z(i));
        }
        return total / static_cast<double>(n);
    };

    Vector c = Vector::Zero(degree + 1);
    double current = loss(c);
    for (int iter = 0; iter < 200; ++iter) {
        const Vector z = epsilon * (features * c);
        Vector grad = Vector::Zero(degree + 1);
        Matrix hess = Matrix::Zero(degree + 1, degree + 1);
        for (Eigen::Index i = 0; i < n; ++i) {
            const double p = std::exp(log_sigmoid(z(i)));
            const Vector f = features.row(i).transpose();
            grad += (p - target(i)) * epsilon * f;
            hess += std::max(p * (1.0 - p), 1e-12) * epsilon * epsilon * f * f.transpose();
        }
        grad /= static_cast<double>(n);
        hess /= static_cast<double>(n);
        if (grad.norm() < 1e-12) break;
        const Vector step = hess.ldlt().solve(grad);
        double t = 1.0;
        Vector next = c - step;
        double next_loss = loss(next);
        while (next_loss > current && t > 1e-10) {
            t *= 0.5;
            next = c - t * step;
            next_loss = loss(next);
        }
        if (next_loss > current) break;
        const bool converged = current - next_loss < 1e-15 * std::max(1.0, std::abs(current));
        c = next;
        current = next_loss;
        if (converged) break;
    }
    return unscale_polynomial(c, centre, scale);
}

} // namespace adbias
