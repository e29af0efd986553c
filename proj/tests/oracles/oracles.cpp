#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>

namespace oracle {

namespace {

double log_posterior(const Vec& beta, const Vec& m0, const Mat& p0, double sigma, const std::vector<double>& xs,
                     const std::vector<double>& ys) {
    const Vec d = beta - m0;
    double lp = -0.5 * d.dot(p0 * d);
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double r = (ys[i] - poly(beta, xs[i])) / sigma;
        lp -= 0.5 * r * r;
    }
    return lp;
}

// Finite-difference Hessian of the log posterior (exact up to rounding for a quadratic).
Mat fd_hessian(const std::function<double(const Vec&)>& f, const Vec& at, const Vec& step) {
    const auto d = at.size();
    Mat h(d, d);
    for (Eigen::Index i = 0; i < d; ++i) {
        for (Eigen::Index j = i; j < d; ++j) {
            Vec pp = at, pm = at, mp = at, mm = at;
            pp(i) += step(i);
            pp(j) += step(j);
            pm(i) += step(i);
            pm(j) -= step(j);
            mp(i) -= step(i);
            mp(j) += step(j);
            mm(i) -= step(i);
            mm(j) -= step(j);
            h(i, j) = h(j, i) = (f(pp) - f(pm) - f(mp) + f(mm)) / (4.0 * step(i) * step(j));
        }
    }
    return h;
}

Vec fd_gradient(const std::function<double(const Vec&)>& f, const Vec& at, const Vec& step) {
    Vec g(at.size());
    for (Eigen::Index i = 0; i < at.size(); ++i) {
        Vec p = at, m = at;
        p(i) += step(i);
        m(i) -= step(i);
        g(i) = (f(p) - f(m)) / (2.0 * step(i));
    }
    return g;
}

double logsumexp(const std::vector<double>& v) {
    const double mx = *std::max_element(v.begin(), v.end());
    if (!std::isfinite(mx)) return mx;
    double s = 0.0;
    for (double x : v) s += std::exp(x - mx);
    return mx + std::log(s);
}

McEstimate summarize(const std::vector<double>& samples) {
    double mean = 0.0;
    for (double s : samples) mean += s;
    mean /= static_cast<double>(samples.size());
    double ss = 0.0;
    for (double s : samples) ss += (s - mean) * (s - mean);
    const double sd = std::sqrt(ss / static_cast<double>(samples.size() - 1));
    return {mean, sd / std::sqrt(static_cast<double>(samples.size()))};
}

} // namespace

double poly(const Vec& beta, double x) {
    double v = 0.0;
    for (Eigen::Index j = beta.size() - 1; j >= 0; --j) v = v * x + beta(j);
    return v;
}

Moments grid_posterior_moments(const Vec& prior_mean, const Mat& prior_cov, double sigma, int degree,
                               const std::vector<double>& xs, const std::vector<double>& ys, int points_per_dim,
                               int refinements) {
    const auto d = static_cast<Eigen::Index>(degree + 1);
    const Mat precision = prior_cov.fullPivLu().inverse();
    auto f = [&](const Vec& b) { return log_posterior(b, prior_mean, precision, sigma, xs, ys); };

    // Laplace start: two Newton steps with finite differences, step sizes from the prior scale.
    Vec centre = prior_mean;
    Vec step = prior_cov.diagonal().cwiseSqrt() * 1e-2;
    Mat cov = prior_cov;
    for (int it = 0; it < 3; ++it) {
        const Mat h = fd_hessian(f, centre, step);
        cov = (-h).fullPivLu().inverse();
        cov = 0.5 * (cov + cov.transpose());
        centre = centre + cov * fd_gradient(f, centre, step);
        step = cov.diagonal().cwiseSqrt() * 1e-2;
    }

    const double half_width = 8.0;
    Moments out;
    for (int round = 0; round <= refinements; ++round) {
        Eigen::SelfAdjointEigenSolver<Mat> eig(cov);
        const Mat root = eig.eigenvectors() * eig.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();
        const auto n = static_cast<long>(std::pow(points_per_dim, static_cast<double>(d)));
        std::vector<double> logw(static_cast<std::size_t>(n));
        Mat pts(d, n);
        for (long c = 0; c < n; ++c) {
            long rest = c;
            Vec u(d);
            for (Eigen::Index k = 0; k < d; ++k) {
                const long idx = rest % points_per_dim;
                rest /= points_per_dim;
                u(k) = -half_width + 2.0 * half_width * static_cast<double>(idx) / (points_per_dim - 1);
            }
            pts.col(c) = centre + root * u;
            logw[static_cast<std::size_t>(c)] = f(pts.col(c));
        }
        const double norm = logsumexp(logw);
        Vec mean = Vec::Zero(d);
        for (long c = 0; c < n; ++c) mean += std::exp(logw[static_cast<std::size_t>(c)] - norm) * pts.col(c);
        Mat second = Mat::Zero(d, d);
        for (long c = 0; c < n; ++c) {
            const Vec r = pts.col(c) - mean;
            second += std::exp(logw[static_cast<std::size_t>(c)] - norm) * r * r.transpose();
        }
        out.mean = mean;
        out.cov = 0.5 * (second + second.transpose());
        centre = out.mean;
        cov = out.cov;
    }
    return out;
}

McEstimate nested_mc_mi_linear(const Vec& mean, const Mat& cov, double sigma, const Vec& phi, int outer, int inner,
                               std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> z(0.0, 1.0);
    // phi . beta is normal with these moments; draw it through the factor of cov.
    Eigen::SelfAdjointEigenSolver<Mat> eig(cov);
    const Mat root = eig.eigenvectors() * eig.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();
    auto draw_mu = [&]() {
        Vec u(mean.size());
        for (Eigen::Index k = 0; k < u.size(); ++k) u(k) = z(rng);
        return phi.dot(mean + root * u);
    };
    Eigen::ArrayXd inner_mu(inner);
    for (int m = 0; m < inner; ++m) inner_mu(m) = draw_mu();

    std::vector<double> samples(static_cast<std::size_t>(outer));
    const double log_inner = std::log(static_cast<double>(inner));
    for (int n = 0; n < outer; ++n) {
        const double mu = draw_mu();
        const double y = mu + sigma * z(rng);
        const double own = -0.5 * std::pow((y - mu) / sigma, 2);
        const Eigen::ArrayXd terms = -0.5 * ((y - inner_mu) / sigma).square();
        const double mx = terms.maxCoeff();
        const double marginal = mx + std::log((terms - mx).exp().sum()) - log_inner;
        samples[static_cast<std::size_t>(n)] = own - marginal;
    }
    return summarize(samples);
}

McEstimate nested_mc_mi_binary(const std::vector<double>& weights, const std::vector<double>& p1, int outer, int inner,
                               std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::discrete_distribution<std::size_t> pick(weights.begin(), weights.end());
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    double inner_p1 = 0.0;
    for (int m = 0; m < inner; ++m) inner_p1 += p1[pick(rng)];
    inner_p1 /= inner;
    const double inner_p0 = 1.0 - inner_p1;

    std::vector<double> samples(static_cast<std::size_t>(outer));
    for (int n = 0; n < outer; ++n) {
        const double p = p1[pick(rng)];
        const bool y = unit(rng) < p;
        const double own = y ? p : 1.0 - p;
        const double marginal = y ? inner_p1 : inner_p0;
        if (!(marginal > 0.0)) throw std::runtime_error("inner sample never produced the observed outcome");
        samples[static_cast<std::size_t>(n)] = std::log(own) - std::log(marginal);
    }
    return summarize(samples);
}

double brute_force_spearman(const std::vector<double>& xs, const std::vector<double>& ys) {
    const std::size_t n = xs.size();
    auto ranks = [n](const std::vector<double>& v) {
        std::vector<double> r(n);
        for (std::size_t i = 0; i < n; ++i) {
            double below = 0.0;
            double tied = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                if (v[j] < v[i]) below += 1.0;
                if (v[j] == v[i] && j != i) tied += 1.0;
            }
            r[i] = 1.0 + below + 0.5 * tied;
        }
        return r;
    };
    const auto rx = ranks(xs);
    const auto ry = ranks(ys);
    const double mean = (static_cast<double>(n) + 1.0) / 2.0;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxy += (rx[i] - mean) * (ry[i] - mean);
        sxx += (rx[i] - mean) * (rx[i] - mean);
        syy += (ry[i] - mean) * (ry[i] - mean);
    }
    return sxy / std::sqrt(sxx * syy);
}

double sigmoid(double z) { return z >= 0.0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z)); }

double eut_prob(double alpha, double epsilon, double p, double gain, double loss) {
    const double v = p * std::pow(gain, alpha) - (1.0 - p) * std::pow(-loss, alpha);
    return sigmoid(epsilon * v);
}

double cpt_value(double alpha, double gamma, double lambda, double p, double gain, double loss) {
    auto w = [gamma](double q) { return std::exp(-std::pow(-std::log(q), gamma)); };
    return w(p) * std::pow(gain, alpha) - w(1.0 - p) * lambda * std::pow(-loss, alpha);
}

double logistic_prob(const Vec& beta, double epsilon, double x) { return sigmoid(epsilon * poly(beta, x)); }

std::vector<double> brute_force_grid_posterior(const std::vector<double>& prior,
                                               const std::vector<std::vector<double>>& likelihoods) {
    std::vector<long double> w(prior.begin(), prior.end());
    for (const auto& row : likelihoods) {
        for (std::size_t i = 0; i < w.size(); ++i) w[i] *= row[i];
    }
    long double total = 0.0L;
    for (auto v : w) total += v;
    std::vector<double> out(w.size());
    for (std::size_t i = 0; i < w.size(); ++i) out[i] = static_cast<double>(w[i] / total);
    return out;
}

Vec least_squares_poly(const std::vector<double>& xs, const std::vector<double>& ys, int degree) {
    const int d = degree + 1;
    using LMat = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;
    using LVec = Eigen::Matrix<long double, Eigen::Dynamic, 1>;
    LMat a = LMat::Zero(d, d);
    LVec b = LVec::Zero(d);
    for (std::size_t i = 0; i < xs.size(); ++i) {
        LVec phi(d);
        long double p = 1.0L;
        for (int j = 0; j < d; ++j) {
            phi(j) = p;
            p *= xs[i];
        }
        a += phi * phi.transpose();
        b += phi * static_cast<long double>(ys[i]);
    }
    const LVec sol = a.fullPivLu().solve(b);
    Vec out(d);
    for (int j = 0; j < d; ++j) out(j) = static_cast<double>(sol(j));
    return out;
}

double midpoint(const std::function<double(double)>& f, double lo, double hi, int points) {
    const double h = (hi - lo) / points;
    double s = 0.0;
    for (int i = 0; i < points; ++i) s += f(lo + (i + 0.5) * h);
    return s * h;
}

double cross_entropy(double p_true, double q_model) {
    double ce = 0.0;
    if (p_true > 0.0) ce -= p_true * std::log(q_model);
    if (p_true < 1.0) ce -= (1.0 - p_true) * std::log(1.0 - q_model);
    return ce;
}

double normal_log_pdf(double y, double mean, double variance) {
    return -0.5 * std::log(2.0 * std::numbers::pi * variance) - 0.5 * (y - mean) * (y - mean) / variance;
}

} // namespace oracle
