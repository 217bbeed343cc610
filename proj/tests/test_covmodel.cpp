#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include <Eigen/Eigenvalues>

#include "oracles.hpp"
#include "stkrig/covmodel.hpp"
#include "stkrig/errors.hpp"

using namespace stkrig;

namespace {

ModelParams make(double s2, double nu, std::vector<double> b, double nugget = 0.0, int d = 2) {
    ModelParams p;
    p.sigma_e2 = s2;
    p.nu = nu;
    p.c_coeffs = Eigen::Map<Eigen::VectorXd>(b.data(), static_cast<Eigen::Index>(b.size()));
    p.nugget = nugget;
    p.d = d;
    return p;
}

}  // namespace

TEST_CASE("ModelParams validation") {
    CHECK_NOTHROW(make(1, 1, {0}).validate());
    CHECK_THROWS_AS(make(0, 1, {0}).validate(), DomainError);
    CHECK_THROWS_AS(make(1, 0.5, {0}).validate(), DomainError);  // 2 nu = d/2
    CHECK_THROWS_AS(make(1, 1, {0}, -1.0).validate(), DomainError);
    CHECK_THROWS_AS(make(1, 1, {}).validate(), DomainError);
    CHECK_THROWS_AS(make(1, 1, {0}, 0.0, 0).validate(), DomainError);
}

TEST_CASE("unconstrained coordinates round trip") {
    ParamLayout layout;
    layout.p = 2;
    layout.estimate_nu = true;
    layout.estimate_nugget = true;
    const ModelParams p = make(2.5, 1.3, {0.1, -0.4, 0.2}, 0.3);
    const Eigen::VectorXd theta = to_unconstrained(p, layout);
    CHECK(theta.size() == 6);
    const ModelParams q = from_unconstrained(theta, layout);
    CHECK(q.sigma_e2 == doctest::Approx(2.5));
    CHECK(q.nu == doctest::Approx(1.3));
    CHECK(q.nugget == doctest::Approx(0.3));
    CHECK((q.c_coeffs - p.c_coeffs).norm() == 0.0);
    // Any real vector maps into the valid region.
    CHECK_NOTHROW(from_unconstrained(Eigen::VectorXd::Constant(6, -30.0), layout).validate());
}

TEST_CASE("c_mod_sq") {
    for (double w : {0.0, 1.0, 3.0}) {
        CHECK(c_mod_sq(w, make(1, 1, {0})) == 1.0);
        CHECK(c_mod_sq(w, make(1, 1, {std::log(4.0)})) == doctest::Approx(4.0));
        CHECK(c_mod_sq(-w, make(1, 1, {0.2, 0.5, -0.3})) == c_mod_sq(w, make(1, 1, {0.2, 0.5, -0.3})));
    }
    CHECK(c_mod_sq(0.0, make(1, 1, {0, 1})) == doctest::Approx(std::exp(1.0)));
    CHECK(c_mod_sq(std::numbers::pi, make(1, 1, {0, 1})) == doctest::Approx(std::exp(-1.0)));
}

TEST_CASE("cov_zero values, scaling and white-noise flatness") {
    CHECK(cov_zero(1.0, make(1, 1, {0})) == doctest::Approx(1.0 / (4.0 * std::numbers::pi)).epsilon(1e-13));
    CHECK(cov_zero(0.7, make(2, 1.4, {0.3, 0.2})) == doctest::Approx(2.0 * cov_zero(0.7, make(1, 1.4, {0.3, 0.2}))));
    CHECK(cov_zero(0.2, make(1, 1.2, {0.4})) == doctest::Approx(cov_zero(2.9, make(1, 1.2, {0.4}))));
    // The limit of the general form: C(h) at h = 1e-9.
    CHECK(cov_freq(1e-9, 1.0, make(1, 1, {0})) == doctest::Approx(1.0 / (4.0 * std::numbers::pi)).epsilon(1e-6));
}

TEST_CASE("planar constant flag differs by 2 pi") {
    ModelParams p = make(1, 1.5, {0.2, 0.4});
    const double general = cov_zero(0.8, p);
    p.planar_constant = true;
    CHECK(cov_zero(0.8, p) == doctest::Approx(2.0 * std::numbers::pi * general).epsilon(1e-12));
}

TEST_CASE("cov_freq: limit, decay, monotonicity, errors") {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    for (int rep = 0; rep < 50; ++rep) {
        const ModelParams p = make(0.5 + U(rng), 0.8 + 2.0 * U(rng), {U(rng) - 0.5, U(rng)});
        const double w = std::numbers::pi * U(rng);
        const double a = std::sqrt(c_mod_sq(w, p));
        CHECK(cov_freq(1e-8 / a, w, p) == doctest::Approx(cov_zero(w, p)).epsilon(1e-6));
        double prev = cov_zero(w, p);
        for (double h = 0.05; h < 8.0; h *= 1.4) {
            const double c = cov_freq(h, w, p);
            CHECK(c > 0.0);
            CHECK(c < prev);
            prev = c;
        }
    }
    CHECK(cov_freq(50.0, 0.0, make(1, 1, {0})) <= 1e-18 * cov_zero(0.0, make(1, 1, {0})));
    CHECK(cov_freq(0.0, 0.3, make(1, 1, {0})) == cov_zero(0.3, make(1, 1, {0})));
    CHECK_THROWS_AS(cov_freq(-1.0, 0.3, make(1, 1, {0})), DomainError);
}

TEST_CASE("general-d form equals the planar closed form") {
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    for (int rep = 0; rep < 100; ++rep) {
        const ModelParams p = make(0.1 + 3.0 * U(rng), 0.6 + 3.0 * U(rng), {2.0 * U(rng) - 1.0, U(rng), -0.3 * U(rng)});
        const double h = 0.01 + 6.0 * U(rng);
        const double w = std::numbers::pi * U(rng);
        CHECK(cov_freq(h, w, p) == doctest::Approx(cov_freq_planar(h, w, p)).epsilon(1e-10));
    }
    // sigma_e2 = 4 pi, |c| = 1, nu = 1, h = 1: (1/2) K_1(1) * 2.
    const ModelParams q = make(4.0 * std::numbers::pi, 1.0, {0.0});
    CHECK(cov_freq(1.0, 0.5, q) == doctest::Approx(oracle::bessel_k(1.0, 1.0)).epsilon(1e-10));
}

TEST_CASE("corr_freq") {
    const ModelParams p = make(1, 1, {0});
    CHECK(corr_freq(0.0, 1.0, p) == 1.0);
    CHECK(corr_freq(1.0, 1.0, p) == doctest::Approx(0.6019072301972346).epsilon(1e-12));
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    for (int rep = 0; rep < 50; ++rep) {
        const ModelParams r = make(1.0 + U(rng), 0.7 + 2.0 * U(rng), {U(rng) - 0.5, U(rng) - 0.5});
        const double h = 5.0 * U(rng) + 1e-3, w = 3.0 * U(rng);
        const double rho = corr_freq(h, w, r);
        CHECK(rho > 0.0);
        CHECK(rho <= 1.0);
        CHECK(rho == doctest::Approx(cov_freq(h, w, r) / cov_zero(w, r)).epsilon(1e-10));
        // Depends on (h, w) only through h |c(w)|.
        const double c = 1.7;
        ModelParams scaled = r;
        scaled.c_coeffs[0] -= 2.0 * std::log(c);
        CHECK(corr_freq(c * h, w, scaled) == doctest::Approx(rho).epsilon(1e-12));
        // nu = 1, d = 2: rho = x K_1(x).
        const ModelParams one = make(1.0, 1.0, {r.c_coeffs[0], r.c_coeffs[1]});
        const double x = h * std::sqrt(c_mod_sq(w, one));
        CHECK(corr_freq(h, w, one) == doctest::Approx(x * oracle::bessel_k(1.0, x)).epsilon(1e-10));
    }
}

TEST_CASE("positive definiteness of [C(|s_i - s_j|, w)]") {
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    for (int set = 0; set < 30; ++set) {
        const int m = 2 + static_cast<int>(U(rng) * 11);
        Eigen::MatrixXd s(m, 2);
        for (int i = 0; i < m; ++i) s.row(i) << 10.0 * U(rng), 10.0 * U(rng);
        const ModelParams p = make(1.0, 0.6 + 2.0 * U(rng), {U(rng) - 0.5, U(rng)});
        for (int f = 0; f < 10; ++f) {
            const double w = std::numbers::pi * U(rng);
            Eigen::MatrixXd c(m, m);
            for (int i = 0; i < m; ++i)
                for (int j = 0; j < m; ++j) c(i, j) = cov_freq((s.row(i) - s.row(j)).norm(), w, p);
            const Eigen::VectorXd ev = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(c).eigenvalues();
            CHECK(ev.minCoeff() >= -1e-8 * ev.maxCoeff());
        }
    }
}

TEST_CASE("st_spectral_density") {
    const ModelParams p = make(std::pow(2.0 * std::numbers::pi, 2), 1.0, {0.0});
    CHECK(st_spectral_density(Eigen::Vector2d::Zero(), 0.4, p) == doctest::Approx(1.0));
    const ModelParams q = make(1.3, 1.2, {0.2, 0.5});
    const double r = 1.7;
    CHECK(st_spectral_density(Eigen::Vector2d(r, 0), 0.9, q) ==
          doctest::Approx(st_spectral_density(Eigen::Vector2d(r * std::cos(0.3), r * std::sin(0.3)), 0.9, q)).epsilon(1e-14));
    CHECK(st_spectral_density(Eigen::Vector2d(2.0, 0), 0.9, q) < st_spectral_density(Eigen::Vector2d(1.0, 0), 0.9, q));
    CHECK_THROWS_AS(st_spectral_density(Eigen::Vector3d::Zero(), 0.9, q), DomainError);
}

TEST_CASE("2-D inverse Fourier transform of the density recovers cov_freq") {
    for (double nu : {1.0, 1.5}) {
        const ModelParams p = make(1.0, nu, {0.3, 0.6});
        const double w = 1.1;
        auto f = [&](double r) { return st_spectral_density(Eigen::Vector2d(r, 0.0), w, p); };
        for (double h : {0.5, 1.0, 2.0}) {
            const double q = oracle::hankel_2d(f, h, 300.0, 200'000);
            CHECK(q == doctest::Approx(cov_freq(h, w, p)).epsilon(0.01));
        }
    }
}

TEST_CASE("variogram_model") {
    const ModelParams p = make(1.0, 1.2, {0.1, 0.4});
    const double w = 0.6;
    CHECK(variogram_model(1e-7, w, p) < 1e-6 * cov_zero(w, p));
    CHECK(variogram_model(80.0, w, p) == doctest::Approx(2.0 * cov_zero(w, p)).epsilon(1e-12));
    double prev = 0.0;
    for (double h = 0.01; h < 10.0; h *= 1.5) {
        const double g = variogram_model(h, w, p);
        CHECK(g > prev);
        CHECK(g == doctest::Approx(2.0 * cov_zero(w, p) * (1.0 - corr_freq(h, w, p))).epsilon(1e-9));
        prev = g;
        ModelParams noisy = p;
        noisy.nugget = 2.0 * std::numbers::pi;
        CHECK(variogram_model(h, w, noisy) == doctest::Approx(g + 2.0).epsilon(1e-12));
    }
    ModelParams noisy = p;
    noisy.nugget = 0.5;
    CHECK(variogram_model(1e-9, w, noisy) == doctest::Approx(2.0 * 0.5 / (2.0 * std::numbers::pi)).epsilon(1e-6));
    CHECK_THROWS_AS(variogram_model(0.0, w, p), DomainError);
}

TEST_CASE("frequency evenness") {
    const ModelParams p = make(1.0, 1.1, {0.2, 0.5, -0.1});
    for (double w : {0.3, 1.9}) {
        CHECK(cov_zero(w, p) == cov_zero(-w, p));
        CHECK(cov_freq(1.3, w, p) == cov_freq(1.3, -w, p));
        CHECK(variogram_model(1.3, w, p) == variogram_model(1.3, -w, p));
    }
}
