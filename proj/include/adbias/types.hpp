#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace adbias {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Rng = std::mt19937_64;

/// Parameter values of a model class, in the class's canonical order.
using ParamVector = Vector;

/// An input to the experiment: a scalar x, or a gamble's (p, G, L).
struct Design {
    Vector value;

    static Design scalar(double x);
    [[nodiscard]] double x() const { return value(0); }
    [[nodiscard]] Eigen::Index dim() const { return value.size(); }
};

/// An observation: real-valued for regression, 0/1 for binary families.
struct Outcome {
    Vector value;

    static Outcome scalar(double y);
    static Outcome binary(int y);
    [[nodiscard]] double y() const { return value(0); }
};

/// Axis-aligned bounds; infinite entries mean unbounded.
struct ParamSpace {
    Vector lower;
    Vector upper;

    static ParamSpace unbounded(Eigen::Index dim);
    static ParamSpace box(Vector lower, Vector upper);

    [[nodiscard]] Eigen::Index dim() const { return lower.size(); }
    [[nodiscard]] bool contains(const ParamVector& theta) const;
};

/// Multivariate normal or uniform-on-box prior.
struct PriorSpec {
    enum class Kind { normal, uniform };

    Kind kind = Kind::normal;
    Vector mean;
    Matrix cov;
    Vector lower;
    Vector upper;

    static PriorSpec normal(Vector mean, Matrix cov);
    static PriorSpec diag_normal(Vector mean, const Vector& variances);
    static PriorSpec uniform(Vector lower, Vector upper);

    [[nodiscard]] Eigen::Index dim() const;
    [[nodiscard]] double log_density(const ParamVector& theta) const;
    [[nodiscard]] ParamVector sample(Rng& rng) const;
    /// Support implied by the prior (the box for uniform, unbounded for normal).
    [[nodiscard]] ParamSpace support() const;
};

enum class Family { gaussian_linear, logistic_poly, eut, cpt };

std::string_view to_string(Family family);
Family family_from_string(std::string_view name);

/// A hypothesized model class m(x, Θ) together with the modeler's prior.
///
/// `noise` is σ (observation standard deviation) for gaussian-linear and the
/// choice sensitivity ε for the binary families. `degree` is the polynomial
/// degree for gaussian-linear and logistic-poly and unused otherwise.
struct ModelSpec {
    Family family = Family::gaussian_linear;
    int degree = 0;
    double noise = 1.0;
    ParamSpace space;
    PriorSpec prior;

    static ModelSpec gaussian_linear(int degree, double sigma, PriorSpec prior);
    static ModelSpec logistic_poly(int degree, double epsilon, PriorSpec prior);
    static ModelSpec eut(double epsilon);
    static ModelSpec cpt(double epsilon);

    [[nodiscard]] Eigen::Index param_dim() const;
    [[nodiscard]] bool is_binary() const { return family != Family::gaussian_linear; }
    /// Throws unless hyperparameters, prior and space are mutually consistent.
    void validate() const;
};

/// The generating conditional distribution f: a fully specified model.
struct TrueModel {
    ModelSpec spec;
    ParamVector params;
};

/// The target distribution g of designs.
struct TargetDistribution {
    enum class Kind { uniform_continuous, uniform_discrete };

    Kind kind = Kind::uniform_continuous;
    double lo = 0.0;
    double hi = 1.0;
    std::vector<Design> designs;

    static TargetDistribution continuous(double lo, double hi);
    static TargetDistribution discrete(std::vector<Design> designs);

    void validate() const;
};

/// `count` evenly spaced points on [lo, hi], endpoints included.
std::vector<double> linspace(double lo, double hi, int count);

/// Evaluation/candidate grid for g: `grid_points` evenly spaced designs for a
/// continuous target, the design list itself for a discrete one.
std::vector<Design> design_grid(const TargetDistribution& g, int grid_points);

} // namespace adbias
