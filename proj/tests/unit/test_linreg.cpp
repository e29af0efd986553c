#include <doctest.h>

#include <cmath>

#include "adbias/error.hpp"
#include "adbias/linreg.hpp"
#include "oracles.hpp"

using namespace adbias;

TEST_SUITE("linreg") {
    TEST_CASE("poly_features examples") {
        CHECK(poly_features(2, 3.0) == Eigen::Vector3d(1, 3, 9));
        CHECK(poly_features(0, 7.0) == Vector::Ones(1));
        CHECK(poly_features(3, -2.0) == Eigen::Vector4d(1, -2, 4, -8));
        CHECK_THROWS_AS(poly_features(1, std::nan("")), Error);
    }

    TEST_CASE("conjugate_update scalar example") {
        const GaussianPosterior prior{Vector::Zero(1), Matrix::Ones(1, 1)};
        const GaussianPosterior post = conjugate_update(prior, 1.0, Vector::Ones(1), 2.0);
        CHECK(std::abs(post.cov(0, 0) - 0.5) < 1e-12);
        CHECK(std::abs(post.mean(0) - 1.0) < 1e-12);
    }

    TEST_CASE("conjugate_update with an uninformative observation") {
        const GaussianPosterior prior{Eigen::Vector2d(1.0, -2.0), Eigen::Matrix2d{{4.0, 1.0}, {1.0, 2.0}}};
        const GaussianPosterior post = conjugate_update(prior, 1e6, Eigen::Vector2d(1.0, 3.0), 50.0);
        CHECK((post.cov - prior.cov).norm() / prior.cov.norm() < 1e-6);
        CHECK((post.mean - prior.mean).norm() / prior.mean.norm() < 1e-6);
    }

    TEST_CASE("conjugate_update matches the grid oracle for k = 2") {
        Rng rng(5);
        std::uniform_real_distribution<double> ux(0.0, 10.0);
        std::normal_distribution<double> z(0.0, 1.0);
        const Eigen::Vector3d var(4.0, 1.0, 0.25);
        const double sigma = 2.0;
        GaussianPosterior post{Vector::Zero(3), var.asDiagonal()};
        std::vector<double> xs, ys;
        for (int i = 0; i < 6; ++i) {
            const double x = ux(rng);
            const double y = 1.0 - 0.5 * x + 0.1 * x * x + sigma * z(rng);
            xs.push_back(x);
            ys.push_back(y);
            post = conjugate_update(post, sigma, poly_features(2, x), y);
        }
        const oracle::Moments ref = oracle::grid_posterior_moments(Vector::Zero(3), var.asDiagonal(), sigma, 2, xs, ys);
        for (int i = 0; i < 3; ++i) {
            const double scale = std::max(std::abs(ref.mean(i)), std::sqrt(ref.cov(i, i)));
            CHECK(std::abs(post.mean(i) - ref.mean(i)) / scale < 1e-4);
        }
        CHECK((post.cov - ref.cov).norm() / ref.cov.norm() < 1e-4);
    }

    TEST_CASE("posterior covariance stays positive definite") {
        GaussianPosterior post{Vector::Zero(4), Eigen::Vector4d(100, 10, 0.1, 0.001).asDiagonal()};
        for (int i = 0; i <= 100; ++i) {
            post = conjugate_update(post, 100.0, poly_features(3, i), 0.0);
            CHECK((post.cov - post.cov.transpose()).norm() == 0.0);
            CHECK(Eigen::LLT<Matrix>(post.cov).info() == Eigen::Success);
        }
    }

    TEST_CASE("conjugate_update rejects a singular prior") {
        const GaussianPosterior bad{Vector::Zero(2), Matrix::Zero(2, 2)};
        try {
            conjugate_update(bad, 1.0, Eigen::Vector2d(1, 1), 0.0);
            FAIL("expected singular_matrix");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::singular_matrix);
        }
    }

    TEST_CASE("eig_linear examples") {
        const GaussianPosterior zero{Vector::Zero(2), Matrix::Zero(2, 2)};
        CHECK(eig_linear(zero, 3.0, Eigen::Vector2d(1, 5)) == 0.0);
        const GaussianPosterior three{Vector::Zero(1), Matrix::Constant(1, 1, 3.0)};
        CHECK(std::abs(eig_linear(three, 1.0, Vector::Ones(1)) - 0.5 * std::log(4.0)) < 1e-12);
    }

    TEST_CASE("eig_linear is monotone in phi S phi") {
        const GaussianPosterior post{Vector::Zero(2), Eigen::Vector2d(100, 10).asDiagonal()};
        double last = -1.0;
        for (int x = 0; x <= 100; x += 5) {
            const double e = eig_linear(post, 100.0, poly_features(1, x));
            CHECK(e >= 0.0);
            CHECK(e > last);
            last = e;
        }
    }

    TEST_CASE("eig_linear agrees with nested Monte Carlo") {
        const GaussianPosterior post{Eigen::Vector2d(1.0, 0.5), Eigen::Matrix2d{{2.0, 0.3}, {0.3, 0.5}}};
        const Eigen::Vector2d phi(1.0, 2.0);
        const auto mc = oracle::nested_mc_mi_linear(post.mean, post.cov, 1.5, phi, 20000, 1000, 42);
        CHECK(std::abs(eig_linear(post, 1.5, phi) - mc.value) < 3.0 * mc.se + 2e-3);
    }

    TEST_CASE("posterior_predictive examples") {
        const GaussianPosterior a{Vector::Constant(1, 2.0), Matrix::Zero(1, 1)};
        const NormalMoments ma = posterior_predictive(a, 1.0, Vector::Ones(1));
        CHECK(ma.mean == 2.0);
        CHECK(ma.variance == 1.0);
        const GaussianPosterior b{Eigen::Vector2d(0, 1), Eigen::Vector2d(0, 1).asDiagonal()};
        const NormalMoments mb = posterior_predictive(b, 0.5, Eigen::Vector2d(1, 2));
        CHECK(std::abs(mb.mean - 2.0) < 1e-12);
        CHECK(std::abs(mb.variance - 4.25) < 1e-12);
    }

    TEST_CASE("predictive variance shrinks at the observed design") {
        GaussianPosterior post{Vector::Zero(3), Eigen::Vector3d(100, 10, 0.1).asDiagonal()};
        for (double x : {0.0, 17.0, 55.0, 100.0}) {
            const Vector phi = poly_features(2, x);
            const double before = posterior_predictive(post, 100.0, phi).variance;
            post = conjugate_update(post, 100.0, phi, 1.0);
            CHECK(posterior_predictive(post, 100.0, phi).variance < before);
        }
    }

    TEST_CASE("theta_star_ols examples") {
        const auto domain = TargetDistribution::continuous(0.0, 100.0);
        const auto prior3 = PriorSpec::diag_normal(Vector::Zero(3), Vector::Ones(3));
        const TrueModel quad{ModelSpec::gaussian_linear(2, 100.0, prior3), Eigen::Vector3d(0, 0, 1)};
        const ParamVector exact = theta_star_ols(quad, 2, domain);
        CHECK((exact - Eigen::Vector3d(0, 0, 1)).norm() < 1e-8);

        const ParamVector lin = theta_star_ols(quad, 1, domain);
        std::vector<double> xs, ys;
        for (int i = 0; i <= 1000; ++i) {
            xs.push_back(i * 0.1);
            ys.push_back(xs.back() * xs.back());
        }
        const oracle::Vec ref = oracle::least_squares_poly(xs, ys, 1);
        CHECK(std::abs(lin(1) - ref(1)) < 1e-8);
        CHECK(std::abs(lin(0) - ref(0)) < 1e-6);
        CHECK(std::abs(lin(1) - 100.0) < 1e-6);
        CHECK(std::abs(lin(0) - -10000.0 / 6.0) < 2.0);  // continuum value; the grid adds an O(1/n) shift

        const auto prior4 = PriorSpec::diag_normal(Vector::Zero(4), Vector::Ones(4));
        const Eigen::Vector4d beta(3.0, -2.0, 0.05, -0.001);
        const TrueModel cubic{ModelSpec::gaussian_linear(3, 100.0, prior4), beta};
        CHECK((theta_star_ols(cubic, 3, domain) - beta).cwiseAbs().maxCoeff() < 1e-8);
    }

    TEST_CASE("nested bases never fit worse") {
        const auto domain = TargetDistribution::continuous(0.0, 100.0);
        const Eigen::Vector4d beta(3.0, -2.0, 0.05, -0.001);
        const TrueModel cubic{
            ModelSpec::gaussian_linear(3, 100.0, PriorSpec::diag_normal(Vector::Zero(4), Vector::Ones(4))), beta};
        double last = std::numeric_limits<double>::infinity();
        for (int k = 0; k <= 3; ++k) {
            const ParamVector fit = theta_star_ols(cubic, k, domain);
            double mse = 0.0;
            for (int i = 0; i <= 1000; ++i) {
                const double x = i * 0.1;
                mse += std::pow(oracle::poly(beta, x) - oracle::poly(fit, x), 2);
            }
            CHECK(mse <= last * (1 + 1e-9));
            last = mse;
        }
    }

    TEST_CASE("ols_fit reports rank deficiency") {
        try {
            ols_fit({1.0, 1.0, 1.0}, {1.0, 2.0, 3.0}, 1);
            FAIL("expected rank_deficient");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::rank_deficient);
        }
    }

    TEST_CASE("gaussian_kl examples and properties") {
        CHECK(gaussian_kl(1.3, 2.0, 1.3, 2.0) == doctest::Approx(0.0).epsilon(1e-12));
        CHECK(std::abs(gaussian_kl(1.0, 1.0, 0.0, 1.0) - 0.5) < 1e-12);
        CHECK(std::abs(gaussian_kl(0.0, 100.0, 0.0, 1000.0) - (std::log(10.0) + 0.005 - 0.5)) < 1e-12);
        CHECK(std::abs(gaussian_kl(0.0, 100.0, 0.0, 1000.0) - 1.8076) < 1e-4);
        Rng rng(9);
        std::uniform_real_distribution<double> u(0.1, 5.0);
        for (int i = 0; i < 200; ++i) {
            const double a = u(rng), b = u(rng), c = u(rng), d = u(rng);
            CHECK(gaussian_kl(a, b, c, d) >= 0.0);
            CHECK(std::abs(gaussian_kl(a, b, a, b)) < 1e-12);
        }
    }
}
