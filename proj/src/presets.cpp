#include "adbias/presets.hpp"

#include <algorithm>
#include <cmath>

#include "adbias/error.hpp"
#include "adbias/experiment.hpp"
#include "adbias/seeding.hpp"

namespace adbias {

namespace {

constexpr double kRegressionNoise = 100.0;
constexpr double kInflatedNoise = 1000.0;
constexpr int kHorizon = 100;

// Classification runs are costly; these are desk-scale defaults.
constexpr int kClassificationReplications = 100;
constexpr int kClassificationParticles = 2000;
constexpr double kClassificationRefreshEss = 0.5;
constexpr int kClassificationGridPoints = 101;

const double kPolyVariances[] = {100.0, 10.0, 0.1, 0.001};

// Cubic truths: the x^3 variance is set so that D_model against the best
// quadratic has the same distribution as D_model of a quadratic truth against
// the best line. On U(0, 100) the top-coefficient residuals have mean squares
// 100^4 / 180 (quadratic) and 50^6 * 8 / 175 (cubic), so the variance is
// 0.1 * (100^4 / 180) / (50^6 * 8 / 175) = 7 / 45000.
constexpr double kCubicGeneratingVariance = 7.0 / 45000.0;

PriorSpec generating_prior(int degree) {
    PriorSpec prior = polynomial_prior(degree);
    if (degree == 3) prior.cov(3, 3) = kCubicGeneratingVariance;
    return prior;
}

ExperimentConfig regression(const std::string& name, int truth_degree, int model_degree, double sigma) {
    ExperimentConfig c;
    c.name = name;
    c.truth.family = Family::gaussian_linear;
    c.truth.degree = truth_degree;
    c.truth.noise = kRegressionNoise;
    c.truth.generating.prior = generating_prior(truth_degree);
    c.model = ModelSpec::gaussian_linear(model_degree, sigma, polynomial_prior(model_degree));
    c.target.kind = TargetConfig::Kind::uniform_continuous;
    c.target.lo = 0.0;
    c.target.hi = 100.0;
    c.arms = {{"adaptive", DesignPolicy::adaptive()}, {"random", DesignPolicy::random()}};
    return c;
}

ExperimentConfig replay(const std::string& name, int truth_degree, int model_degree, int horizon) {
    ExperimentConfig c = regression(name, truth_degree, model_degree, kInflatedNoise);
    const ModelSpec reference = ModelSpec::gaussian_linear(model_degree, kRegressionNoise, polynomial_prior(model_degree));
    c.arms = {{"replay", DesignPolicy::replay(linear_adaptive_sequence(reference, c.candidates(), horizon))},
              {"random", DesignPolicy::random()}};
    c.alb_arm = "replay";
    return c;
}

ExperimentConfig preference(const std::string& name, Family truth_family, double model_epsilon, std::uint64_t seed) {
    ExperimentConfig c;
    c.name = name;
    c.truth.family = truth_family;
    c.truth.noise = 1.0;
    c.truth.generating.prior = truth_family == Family::eut
                                   ? PriorSpec::uniform(Vector::Constant(1, 0.0), Vector::Constant(1, 1.0))
                                   : PriorSpec::uniform(Eigen::Vector3d(0.0, 0.0, 1.0), Eigen::Vector3d(1.0, 1.0, 2.0));
    c.model = ModelSpec::eut(model_epsilon);
    c.target.kind = TargetConfig::Kind::gamble_space;
    c.target.gamble_count = 200;
    c.target.gamble_seed = derive_seed(seed, 0, "", "gambles");
    c.arms = {{"adaptive", DesignPolicy::adaptive()}, {"random", DesignPolicy::random()}};
    return c;
}

ExperimentConfig classification(const std::string& name, double epsilon) {
    ExperimentConfig c;
    c.name = name;
    c.truth.family = Family::logistic_poly;
    c.truth.degree = 2;
    c.truth.noise = 1.0;
    c.truth.generating.prior = generating_prior(2);
    c.truth.generating.pool_size = 200;
    c.truth.generating.keep_fraction = 0.1;
    c.model = ModelSpec::logistic_poly(1, epsilon, polynomial_prior(1));
    c.target.kind = TargetConfig::Kind::uniform_continuous;
    c.target.lo = 0.0;
    c.target.hi = 100.0;
    c.arms = {{"adaptive", DesignPolicy::adaptive()}, {"random", DesignPolicy::random()}};
    c.design_grid_points = kClassificationGridPoints;
    c.posterior.particles = kClassificationParticles;
    c.posterior.refresh_ess_fraction = kClassificationRefreshEss;
    return c;
}

ExperimentConfig demo() {
    ExperimentConfig c;
    c.name = "fig1-demo";
    c.truth.family = Family::gaussian_linear;
    c.truth.degree = 2;
    c.truth.noise = std::sqrt(0.5);
    c.truth.generating.kind = GeneratingSpec::Kind::fixed;
    c.truth.generating.value = Eigen::Vector3d(0.0, 0.0, 1.0);
    c.model = ModelSpec::gaussian_linear(1, std::sqrt(0.5), polynomial_prior(1));
    c.target.lo = 0.0;
    c.target.hi = 1.0;
    c.arms = {{"adaptive", DesignPolicy::adaptive()}, {"random", DesignPolicy::random()}};
    return c;
}

} // namespace

PriorSpec polynomial_prior(int degree) {
    if (degree < 0 || degree > 3) throw Error(ErrorCode::invalid_argument, "preset priors cover degrees 0 to 3");
    Vector var(degree + 1);
    for (int j = 0; j <= degree; ++j) var(j) = kPolyVariances[j];
    return PriorSpec::diag_normal(Vector::Zero(degree + 1), var);
}

const std::vector<std::string>& preset_names() {
    static const std::vector<std::string> names = {
        "fig1-demo", "fig3-linear", "fig3-quadratic", "fig3-cubic", "fig4-12",   "fig4-23",    "fig5a",
        "fig5b",     "fig5c",       "fig5d",          "fig6a",      "fig6b",     "fig6c",      "fig6d",
        "fig8-eps1", "fig8-eps01",  "fig8-eps001",
    };
    return names;
}

bool is_preset(const std::string& name) {
    const auto& names = preset_names();
    return std::find(names.begin(), names.end(), name) != names.end();
}

ExperimentConfig preset(const std::string& name, const PresetOptions& options) {
    const std::uint64_t seed = options.seed.value_or(kDefaultBaseSeed);
    ExperimentConfig c;
    if (name == "fig1-demo") c = demo();
    else if (name == "fig3-linear") c = regression(name, 2, 1, kRegressionNoise);
    else if (name == "fig3-quadratic") c = regression(name, 2, 2, kRegressionNoise);
    else if (name == "fig3-cubic") c = regression(name, 2, 3, kRegressionNoise);
    else if (name == "fig4-12") c = regression(name, 2, 1, kRegressionNoise);
    else if (name == "fig4-23") c = regression(name, 3, 2, kRegressionNoise);
    else if (name == "fig5a") c = regression(name, 2, 1, kInflatedNoise);
    else if (name == "fig5b") c = regression(name, 3, 2, kInflatedNoise);
    else if (name == "fig5c") c = replay(name, 2, 1, kHorizon);
    else if (name == "fig5d") c = replay(name, 3, 2, kHorizon);
    else if (name == "fig6a") c = preference(name, Family::eut, 1.0, seed);
    else if (name == "fig6b" || name == "fig6c") c = preference(name, Family::cpt, 1.0, seed);
    else if (name == "fig6d") c = preference(name, Family::cpt, 0.1, seed);
    else if (name == "fig8-eps1") c = classification(name, 1.0);
    else if (name == "fig8-eps01") c = classification(name, 0.1);
    else if (name == "fig8-eps001") c = classification(name, 0.01);
    else throw Error(ErrorCode::config, "unknown preset '" + name + "'");

    c.horizon = kHorizon;
    c.base_seed = seed;
    c.output_dir = "out/" + name;
    const int desk = c.model.family == Family::logistic_poly ? kClassificationReplications : kDeskReplications;
    c.replications = options.replications.value_or(options.full ? kFullReplications : desk);
    c.validate();
    return c;
}

} // namespace adbias
