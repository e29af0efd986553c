#pragma once

#include <cstdint>
#include <vector>

#include "adbias/types.hpp"

namespace adbias {

/// Smallest log-probability the library will exponentiate.
inline constexpr double kLogProbFloor = -745.0;

/// log(1 / (1 + e^{-z})), computed without overflow.
double log_sigmoid(double z);
/// log_sigmoid clamped below at kLogProbFloor.
double clamped_log_sigmoid(double z);

/// A two-outcome gamble <[p, G, 1-p, L], 0>: win `gain` with probability p,
/// otherwise lose `loss` (negative), offered against a sure zero.
struct Gamble {
    double p = 0.5;
    double gain = 1.0;
    double loss = -1.0;

    void validate() const;
    [[nodiscard]] Design to_design() const;
    static Gamble from_design(const Design& d);
};

struct GambleDesignSpace {
    std::vector<Gamble> gambles;
    std::uint64_t seed = 0;

    [[nodiscard]] std::vector<Design> designs() const;
};

struct EutParams {
    double alpha = 1.0;
};

struct CptParams {
    double alpha = 1.0;
    double gamma = 1.0;
    double loss_aversion = 1.0;
};

/// P(choose gamble) = 1 / (1 + e^{-epsilon V}).
double logistic_choice_prob(double epsilon, double value);

/// p G^alpha - (1-p) (-L)^alpha.
double eut_value(const EutParams& params, const Gamble& g);

/// Prelec weighting w(p) = exp(-(-ln p)^gamma).
double prelec_weight(double gamma, double p);

/// w(p) G^alpha - w(1-p) Lambda (-L)^alpha.
double cpt_value(const CptParams& params, const Gamble& g);

/// Bernoulli success probability of a logistic polynomial classifier,
/// 1 / (1 + exp(-epsilon * sum_j beta_j x^j)).
double classify_prob(const Vector& beta, double epsilon, double x);

/// The 200-gamble design space (or `count` gambles) drawn from a seeded stream:
/// p ~ U(0.05, 0.95), G ~ U(1, 100), L ~ U(-100, -1).
GambleDesignSpace generate_gamble_space(std::uint64_t seed, int count = 200);

/// KL(Bernoulli(p_true) || Bernoulli(p_model)) with 0 log 0 = 0.
double bernoulli_kl(double p_true, double p_model);

/// Same divergence parameterized by logits, stable when either side saturates.
double bernoulli_kl_logits(double logit_true, double logit_model);

/// Binary entropy of Bernoulli(sigmoid(z)) in nats.
double bernoulli_entropy_logit(double z);

/// Coefficients of the logistic polynomial of degree `degree` (with sensitivity
/// `epsilon`) minimizing mean cross-entropy against target success logits at `xs`.
/// Solved by damped Newton iterations on a centred and scaled basis.
ParamVector theta_star_logistic(const std::vector<double>& xs, const std::vector<double>& target_logits, int degree,
                                double epsilon);

} // namespace adbias
