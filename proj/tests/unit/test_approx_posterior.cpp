#include <doctest.h>

#include <cmath>

#include "adbias/approx_posterior.hpp"
#include "adbias/binary_models.hpp"
#include "adbias/error.hpp"
#include "adbias/likelihood.hpp"
#include "adbias/linreg.hpp"
#include "oracles.hpp"

using namespace adbias;

namespace {

Outcome draw_binary(double p, Rng& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    return Outcome::binary(u(rng) < p ? 1 : 0);
}

double weight_sum(const Vector& log_weights) { return log_weights.array().exp().sum(); }

}  // namespace

TEST_SUITE("approx-posterior") {
    TEST_CASE("normalize_log_weights and ESS") {
        const Vector lw = normalize_log_weights(Eigen::Vector3d(0.0, std::log(2.0), std::log(7.0)));
        CHECK(std::abs(weight_sum(lw) - 1.0) < 1e-12);
        CHECK(std::abs(std::exp(lw(2)) - 0.7) < 1e-12);
        CHECK(std::abs(effective_sample_size(normalize_log_weights(Vector::Zero(50))) - 50.0) < 1e-9);
        CHECK(std::abs(effective_sample_size(Eigen::Vector2d(0.0, -1e300)) - 1.0) < 1e-12);
        CHECK_THROWS_AS(normalize_log_weights(Vector::Constant(3, -std::numeric_limits<double>::infinity())), Error);
    }

    TEST_CASE("lattice spans the parameter box") {
        const GridPosterior g = GridPosterior::lattice(ModelSpec::cpt(1.0), 5);
        CHECK(g.size() == 125);
        CHECK(g.points.row(0).minCoeff() == 0.0);
        CHECK(g.points.row(2).maxCoeff() == 2.0);
        CHECK(std::abs(weight_sum(g.log_weights) - 1.0) < 1e-10);
        const auto unbounded = ModelSpec::logistic_poly(1, 1.0, PriorSpec::diag_normal(Vector::Zero(2), Vector::Ones(2)));
        CHECK_THROWS_AS(GridPosterior::lattice(unbounded, 5), Error);
    }

    TEST_CASE("grid_update examples") {
        const ModelSpec spec = ModelSpec::eut(1.0);
        const GridPosterior flat = GridPosterior::lattice(spec, 101);
        // V = 0 for every alpha: the likelihood is constant.
        const GridPosterior same = grid_update(flat, spec, Gamble{0.5, 1.0, -1.0}.to_design(), Outcome::binary(1));
        CHECK((same.log_weights - flat.log_weights).cwiseAbs().maxCoeff() < 1e-12);

        // Two points with likelihoods 0.2 and 0.8 for the observed outcome.
        const auto logistic = ModelSpec::logistic_poly(0, 1.0, PriorSpec::diag_normal(Vector::Zero(1), Vector::Ones(1)));
        const double l1 = std::log(0.2 / 0.8);
        const GridPosterior two = GridPosterior::from_points(Eigen::RowVector2d(l1, -l1), Vector::Zero(2));
        const GridPosterior post = grid_update(two, logistic, Design::scalar(0.0), Outcome::binary(1));
        CHECK(std::abs(std::exp(post.log_weights(0)) - 0.2) < 1e-12);
        CHECK(std::abs(std::exp(post.log_weights(1)) - 0.8) < 1e-12);
    }

    TEST_CASE("lattice ESS shrinks on average as EUT data accumulate") {
        const ModelSpec spec = ModelSpec::eut(1.0);
        const GridPosterior prior = GridPosterior::lattice(spec, 1001);
        const auto space = generate_gamble_space(17, 50);
        const std::vector<int> checkpoints{0, 5, 10, 20, 30, 40, 50};
        std::vector<double> mean_ess(checkpoints.size(), 0.0);
        for (int run = 0; run < 100; ++run) {
            Rng rng(1000 + run);
            std::uniform_real_distribution<double> ua(0.0, 1.0);
            const double alpha = ua(rng);
            GridPosterior post = prior;
            std::size_t c = 0;
            for (int t = 0; t <= 50; ++t) {
                if (c < checkpoints.size() && checkpoints[c] == t) mean_ess[c++] += effective_sample_size(post.log_weights) / 100.0;
                if (t == 50) break;
                const Gamble g = space.gambles[static_cast<std::size_t>(t)];
                const Outcome y = draw_binary(oracle::eut_prob(alpha, 1.0, g.p, g.gain, g.loss), rng);
                post = grid_update(post, spec, g.to_design(), y);
            }
        }
        for (std::size_t c = 1; c < checkpoints.size(); ++c) CHECK(mean_ess[c] < mean_ess[c - 1]);
    }

    TEST_CASE("grid_update matches the brute-force posterior") {
        const ModelSpec spec = ModelSpec::cpt(0.2);
        const GridPosterior prior = GridPosterior::lattice(spec, 7);
        const auto space = generate_gamble_space(3, 20);
        Rng rng(8);
        GridPosterior post = prior;
        std::vector<std::vector<double>> rows;
        for (const Gamble& g : space.gambles) {
            const double v = oracle::cpt_value(0.6, 0.7, 1.4, g.p, g.gain, g.loss);
            const Outcome y = draw_binary(oracle::sigmoid(0.2 * v), rng);
            post = grid_update(post, spec, g.to_design(), y);
            std::vector<double> row;
            for (Eigen::Index i = 0; i < prior.size(); ++i) {
                const auto th = prior.points.col(i);
                const double p = oracle::sigmoid(0.2 * oracle::cpt_value(th(0), th(1), th(2), g.p, g.gain, g.loss));
                row.push_back(y.y() == 1.0 ? p : 1.0 - p);
            }
            rows.push_back(row);
        }
        const std::vector<double> flat(static_cast<std::size_t>(prior.size()), 1.0);
        const auto ref = oracle::brute_force_grid_posterior(flat, rows);
        double worst = 0.0;
        for (Eigen::Index i = 0; i < prior.size(); ++i) {
            worst = std::max(worst, std::abs(std::exp(post.log_weights(i)) - ref[static_cast<std::size_t>(i)]));
        }
        CHECK(worst < 1e-12);
    }

    TEST_CASE("particle_init draws from the prior") {
        const auto spec = ModelSpec::logistic_poly(1, 1.0, PriorSpec::diag_normal(Eigen::Vector2d(1, -1), Eigen::Vector2d(4, 1)));
        const ParticlePosterior p = particle_init(spec, 20000, 3);
        CHECK(p.size() == 20000);
        CHECK(std::abs(p.ess() - 20000.0) < 1e-6);
        const Vector mean = p.samples.rowwise().mean();
        CHECK(std::abs(mean(0) - 1.0) < 4.0 * 2.0 / std::sqrt(20000.0));
        CHECK(std::abs(mean(1) + 1.0) < 4.0 * 1.0 / std::sqrt(20000.0));
        CHECK_THROWS_AS(particle_init(spec, 0, 3), Error);
    }

    TEST_CASE("particle_step with a constant likelihood leaves the mean in place") {
        // A symmetric gamble has V = 0 for every alpha.
        const ModelSpec eut = ModelSpec::eut(1.0);
        const ParticlePosterior e0 = particle_init(eut, 4000, 11);
        const ParticlePosterior e1 = particle_step(e0, eut, Gamble{0.5, 10.0, -10.0}.to_design(), Outcome::binary(0), 12);
        const double m0 = posterior_expectation(e0, [](const ParamVector& th) { return th(0); });
        const double m1 = posterior_expectation(e1, [](const ParamVector& th) { return th(0); });
        const double se = std::sqrt(1.0 / 12.0 / e1.ess());
        CHECK(std::abs(m1 - m0) < 3.0 * se + 3.0 * std::sqrt(1.0 / 12.0 / 4000.0));
        CHECK(std::abs(weight_sum(e1.log_weights) - 1.0) < 1e-10);
        CHECK(e1.refreshes == 1);
        CHECK(e1.history.size() == 1);
        CHECK((e1.samples.array() >= 0.0).all());
        CHECK((e1.samples.array() <= 1.0).all());
    }

    TEST_CASE("particle posterior tracks the conjugate posterior") {
        const PriorSpec prior = PriorSpec::diag_normal(Vector::Constant(1, 0.0), Vector::Constant(1, 4.0));
        const ModelSpec spec = ModelSpec::gaussian_linear(0, 1.0, prior);
        ParticlePosterior p = particle_init(spec, 10000, 21);
        GaussianPosterior exact = GaussianPosterior::from_prior(prior);
        Rng rng(22);
        std::normal_distribution<double> noise(0.0, 1.0);
        for (int t = 0; t < 20; ++t) {
            const double y = 0.7 + noise(rng);
            p = particle_step(p, spec, Design::scalar(0.0), Outcome::scalar(y), 100 + t);
            exact = conjugate_update(exact, 1.0, Vector::Ones(1), y);
        }
        const double mean = posterior_expectation(p, [](const ParamVector& th) { return th(0); });
        const double second = posterior_expectation(p, [](const ParamVector& th) { return th(0) * th(0); });
        const double var = second - mean * mean;
        CHECK(std::abs(mean - exact.mean(0)) / std::abs(exact.mean(0)) < 0.02);
        CHECK(std::abs(var - exact.cov(0, 0)) / exact.cov(0, 0) < 0.02);
        CHECK(p.bandwidth(0) > 0.0);
    }

    TEST_CASE("particle_step is deterministic given its seed") {
        const auto spec = ModelSpec::logistic_poly(1, 1.0, PriorSpec::diag_normal(Vector::Zero(2), Eigen::Vector2d(100, 10)));
        const ParticlePosterior p0 = particle_init(spec, 500, 5);
        const ParticlePosterior a = particle_step(p0, spec, Design::scalar(0.3), Outcome::binary(1), 9);
        const ParticlePosterior b = particle_step(p0, spec, Design::scalar(0.3), Outcome::binary(1), 9);
        const ParticlePosterior c = particle_step(p0, spec, Design::scalar(0.3), Outcome::binary(1), 10);
        CHECK((a.samples.array() == b.samples.array()).all());
        CHECK((a.log_weights.array() == b.log_weights.array()).all());
        CHECK(!(a.samples.array() == c.samples.array()).all());
    }

    TEST_CASE("particle_reweight is exact importance reweighting") {
        const auto spec = ModelSpec::logistic_poly(1, 1.0, PriorSpec::diag_normal(Vector::Zero(2), Eigen::Vector2d(4, 1)));
        const ParticlePosterior p0 = particle_init(spec, 300, 5);
        const ParticlePosterior p1 = particle_reweight(p0, spec, Design::scalar(0.5), Outcome::binary(0));
        std::vector<double> prior(300, 1.0), row;
        for (Eigen::Index i = 0; i < 300; ++i) row.push_back(1.0 - oracle::logistic_prob(p0.samples.col(i), 1.0, 0.5));
        const auto ref = oracle::brute_force_grid_posterior(prior, {row});
        for (Eigen::Index i = 0; i < 300; ++i) {
            CHECK(std::abs(std::exp(p1.log_weights(i)) - ref[static_cast<std::size_t>(i)]) < 1e-14);
        }
        CHECK((p1.samples.array() == p0.samples.array()).all());
    }

    TEST_CASE("particle weight underflow names the step") {
        const auto spec = ModelSpec::logistic_poly(0, 1.0, PriorSpec::diag_normal(Vector::Zero(1), Vector::Ones(1)));
        ParticlePosterior p = particle_init(spec, 10, 1);
        p.log_weights = Vector::Constant(10, -std::numeric_limits<double>::infinity());
        try {
            particle_reweight(p, spec, Design::scalar(0.0), Outcome::binary(1));
            FAIL("expected weight_underflow");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::weight_underflow);
            CHECK(std::string(e.what()).find("step 1") != std::string::npos);
        }
    }

    TEST_CASE("posterior_expectation examples") {
        const GridPosterior g = GridPosterior::lattice(ModelSpec::cpt(1.0), 5);
        CHECK(std::abs(posterior_expectation(g, [](const ParamVector&) { return 1.0; }) - 1.0) < 1e-12);
        const ParamVector th0 = Eigen::Vector3d(0.3, 0.4, 1.5);
        auto h = [](const ParamVector& th) { return std::sin(th(0)) + th(1) * th(2); };
        CHECK(posterior_expectation(GridPosterior::point_mass(th0), h) == doctest::Approx(h(th0)).epsilon(1e-15));
    }

    TEST_CASE("posterior_expectation matches dense quadrature") {
        const ModelSpec spec = ModelSpec::eut(0.5);
        GridPosterior post = GridPosterior::lattice(spec, 1001);
        const auto space = generate_gamble_space(4, 8);
        std::vector<std::pair<Gamble, int>> data;
        Rng rng(6);
        for (const Gamble& g : space.gambles) {
            const Outcome y = draw_binary(oracle::eut_prob(0.5, 0.5, g.p, g.gain, g.loss), rng);
            post = grid_update(post, spec, g.to_design(), y);
            data.emplace_back(g, static_cast<int>(y.y()));
        }
        auto density = [&](double a) {
            double l = 1.0;
            for (const auto& [g, y] : data) {
                const double p = oracle::eut_prob(a, 0.5, g.p, g.gain, g.loss);
                l *= y == 1 ? p : 1.0 - p;
            }
            return l;
        };
        const double z = oracle::midpoint(density, 0.0, 1.0, 100000);
        for (const auto& h : std::vector<std::function<double(double)>>{
                 [](double a) { return a; }, [](double a) { return std::exp(a); }, [](double a) { return std::cos(3 * a) + 2; }}) {
            const double ref = oracle::midpoint([&](double a) { return h(a) * density(a); }, 0.0, 1.0, 100000) / z;
            const double got = posterior_expectation(post, [&](const ParamVector& th) { return h(th(0)); });
            CHECK(std::abs(got - ref) / std::abs(ref) < 1e-3);
        }
    }

    TEST_CASE("binary_predictive from a lattice table matches direct evaluation") {
        const ModelSpec spec = ModelSpec::cpt(1.0);
        GridPosterior post = GridPosterior::lattice(spec, 9);
        const auto designs = generate_gamble_space(2, 30).designs();
        Rng rng(3);
        for (int t = 0; t < 5; ++t) post = grid_update(post, spec, designs[static_cast<std::size_t>(t)], draw_binary(0.5, rng));
        const BinaryPredictive a = binary_predictive(post.points, post.log_weights, spec, designs, true);
        const BinaryPredictive b = binary_predictive(lattice_table(post.points, spec, designs), post.log_weights, true);
        CHECK((a.log_p1 - b.log_p1).abs().maxCoeff() < 1e-10);
        CHECK((a.log_p0 - b.log_p0).abs().maxCoeff() < 1e-10);
        CHECK((a.mean_entropy - b.mean_entropy).abs().maxCoeff() < 1e-10);
        CHECK(((a.log_p1.exp() + a.log_p0.exp()) - 1.0).abs().maxCoeff() < 1e-12);
    }
}
