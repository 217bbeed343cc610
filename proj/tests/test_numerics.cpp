#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include <Eigen/QR>

#include "oracles.hpp"
#include "stkrig/errors.hpp"
#include "stkrig/numerics.hpp"

using namespace stkrig;

TEST_CASE("log_gamma known values") {
    CHECK(log_gamma(1.0) == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(log_gamma(0.5) == doctest::Approx(0.5723649429247001).epsilon(1e-13));
    CHECK(log_gamma(10.0) == doctest::Approx(std::log(362880.0)).epsilon(1e-13));
    for (double x : {1e-3, 0.37, 2.5, 17.0, 999.0}) {
        CHECK(std::abs(log_gamma(x) - std::log(std::abs(std::tgamma(x > 170 ? 170 : x)))) <
              (x > 170 ? 1e300 : 1e-12 * std::max(1.0, std::abs(log_gamma(x)))));
    }
    CHECK_THROWS_AS(log_gamma(0.0), DomainError);
    CHECK_THROWS_AS(log_gamma(-1.0), DomainError);
    CHECK_THROWS_AS(log_gamma(std::nan("")), DomainError);
}

TEST_CASE("bessel_k closed form, oracle and errors") {
    CHECK(bessel_k(0.5, 1.0) == doctest::Approx(std::sqrt(std::numbers::pi / 2.0) * std::exp(-1.0)).epsilon(1e-13));
    CHECK(bessel_k(1.0, 1.0) == doctest::Approx(0.6019072301972346).epsilon(1e-12));
    CHECK_THROWS_AS(bessel_k(1.0, 0.0), DomainError);
    CHECK_THROWS_AS(bessel_k(1.0, -2.0), DomainError);
    CHECK_THROWS_AS(bessel_k(200.0, 1e-300), RangeError);
}

TEST_CASE("bessel_k reflection identity uses |order|") {
    for (double nu : {0.3, 1.0, 2.75}) {
        for (double x : {0.01, 1.0, 7.0}) {
            CHECK(bessel_k(-nu, x) == bessel_k(nu, x));
            CHECK(bessel_k(-nu, x) == doctest::Approx(oracle::bessel_k(-nu, x)).epsilon(1e-10));
        }
    }
}

TEST_CASE("bessel_k is decreasing in x") {
    for (double nu : {0.0, 0.5, 3.0, 12.0}) {
        double prev = bessel_k(nu, 1e-3);
        for (double x = 2e-3; x < 40.0; x *= 1.3) {
            const double v = bessel_k(nu, x);
            CHECK(v < prev);
            prev = v;
        }
    }
}

TEST_CASE("small-argument limit x^v K_v(x) / (2^{v-1} Gamma(v)) -> 1") {
    for (double nu : {0.5, 1.0, 2.5}) {
        for (double x : {1e-4, 1e-5}) {
            const double r = std::pow(x, nu) * bessel_k(nu, x) / (std::pow(2.0, nu - 1.0) * std::tgamma(nu));
            CHECK(std::abs(r - 1.0) <= 1e-3);
        }
    }
}

TEST_CASE("dft_forward matches the brute-force oracle") {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> N;
    for (std::size_t n = 2; n <= 64; ++n) {
        std::vector<double> z(n);
        for (auto& v : z) v = N(rng);
        const Eigen::VectorXcd j = dft_forward(z);
        REQUIRE(j.size() == static_cast<Eigen::Index>(n / 2 + 1));
        double num = 0.0, den = 0.0;
        for (std::size_t k = 0; k <= n / 2; ++k) {
            const auto o = oracle::dft(z, k);
            num += std::norm(j[static_cast<Eigen::Index>(k)] - o);
            den += std::norm(o);
        }
        CHECK(std::sqrt(num / den) <= 1e-10);
    }
    CHECK_THROWS_AS(dft_forward(std::vector<double>{}), DomainError);
}

TEST_CASE("dft_forward of a constant and of a cosine") {
    std::vector<double> c(30, 4.2);
    const Eigen::VectorXcd jc = dft_forward(c);
    for (Eigen::Index k = 1; k < jc.size(); ++k) CHECK(std::abs(jc[k]) <= 1e-12 * 4.2);

    const std::size_t n = 64;
    std::vector<double> z(n);
    for (std::size_t t = 1; t <= n; ++t) z[t - 1] = std::cos(2.0 * std::numbers::pi * static_cast<double>(t) / n);
    const Eigen::VectorXcd j = dft_forward(z);
    CHECK(std::abs(j[1]) == doctest::Approx(std::sqrt(n / (2.0 * std::numbers::pi)) / 2.0).epsilon(1e-12));
    for (Eigen::Index k = 2; k < j.size(); ++k) CHECK(std::abs(j[k]) <= 1e-12);
    CHECK(std::abs(j[0]) <= 1e-12);
}

TEST_CASE("dft round trip for every n in 2..64 and n = 100") {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> N;
    std::vector<std::size_t> lengths;
    for (std::size_t n = 2; n <= 64; ++n) lengths.push_back(n);
    lengths.push_back(100);
    for (std::size_t n : lengths) {
        Eigen::VectorXd z(static_cast<Eigen::Index>(n));
        for (auto& v : z) v = N(rng);
        const Eigen::VectorXd back = dft_inverse(dft_forward(std::span<const double>(z.data(), n)), n);
        CHECK((back - z).norm() <= 1e-10 * z.norm());
    }
}

TEST_CASE("dft_inverse: zero, cosine synthesis and symmetry errors") {
    CHECK(dft_inverse(Eigen::VectorXcd::Zero(5), 8).cwiseAbs().maxCoeff() == 0.0);

    // Coefficients of cos(w_2 t) built by hand on the full grid.
    const std::size_t n = 12;
    Eigen::VectorXcd full = Eigen::VectorXcd::Zero(n);
    const double a = std::sqrt(n / (2.0 * std::numbers::pi)) / 2.0;
    full[2] = a;
    full[n - 2] = std::conj(full[2]);
    const Eigen::VectorXd z = dft_inverse(full, n);
    for (std::size_t t = 1; t <= n; ++t) {
        CHECK(z[static_cast<Eigen::Index>(t - 1)] ==
              doctest::Approx(std::cos(2.0 * 2.0 * std::numbers::pi * static_cast<double>(t) / n)).epsilon(1e-12));
    }

    Eigen::VectorXcd bad = full;
    bad[n - 2] += cdouble(0.0, 1e-3);
    CHECK_THROWS_AS(dft_inverse(bad, n), DomainError);
    CHECK_THROWS_AS(dft_inverse(Eigen::VectorXcd::Zero(3), 12), DomainError);
}

TEST_CASE("nelder_mead test functions") {
    OptimizerConfig cfg;
    {
        auto r = nelder_mead([](const Eigen::VectorXd& x) { return (x[0] - 2.0) * (x[0] - 2.0); },
                             Eigen::VectorXd::Zero(1), cfg);
        CHECK(r.converged);
        CHECK(std::abs(r.x[0] - 2.0) <= 1e-6);
    }
    {
        auto r = nelder_mead([](const Eigen::VectorXd& x) { return x[0] * x[0] + 10.0 * x[1] * x[1]; },
                             Eigen::Vector2d(3.0, 3.0), cfg);
        CHECK(r.x.cwiseAbs().maxCoeff() <= 1e-5);
    }
    {
        auto rosen = [](const Eigen::VectorXd& x) {
            return 100.0 * std::pow(x[1] - x[0] * x[0], 2) + std::pow(1.0 - x[0], 2);
        };
        auto r = nelder_mead(rosen, Eigen::Vector2d(-1.2, 1.0), cfg);
        CHECK(r.iterations <= 2000);
        CHECK(std::abs(r.x[0] - 1.0) <= 1e-3);
        CHECK(std::abs(r.x[1] - 1.0) <= 1e-3);
        // Dense grid search agrees on the basin.
        double best = 1e300, bx = 0, by = 0;
        for (int i = 0; i <= 400; ++i) {
            for (int j = 0; j <= 400; ++j) {
                const Eigen::Vector2d p(-2.0 + i * 0.01, -1.0 + j * 0.01);
                if (rosen(p) < best) best = rosen(p), bx = p[0], by = p[1];
            }
        }
        CHECK(std::abs(bx - r.x[0]) <= 0.011);
        CHECK(std::abs(by - r.x[1]) <= 0.011);
    }
}

TEST_CASE("nelder_mead never worsens x0 and handles failures") {
    OptimizerConfig cfg;
    auto f = [](const Eigen::VectorXd& x) { return x[0] > 1.0 ? std::nan("") : std::pow(x[0] - 3.0, 2); };
    auto r = nelder_mead(f, Eigen::VectorXd::Zero(1), cfg);
    CHECK(r.value <= 9.0);
    CHECK(r.x[0] <= 1.0 + 1e-12);

    CHECK_THROWS_AS(nelder_mead([](const Eigen::VectorXd&) { return std::nan(""); }, Eigen::VectorXd::Zero(2), cfg),
                    DomainError);
    OptimizerConfig capped;
    capped.max_iterations = 3;
    auto c = nelder_mead([](const Eigen::VectorXd& x) { return x.squaredNorm(); }, Eigen::Vector3d(5, 5, 5), capped);
    CHECK_FALSE(c.converged);
    OptimizerConfig bad;
    bad.tolerance_f = 0.0;
    CHECK_THROWS_AS(bad.validate(), DomainError);
}

TEST_CASE("hpd_solve small exact systems") {
    const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(4, 4);
    const Eigen::MatrixXd b = Eigen::VectorXd::LinSpaced(4, 1.0, 4.0);
    CHECK((hpd_solve<double>(I, b).solution - b).norm() == 0.0);

    Eigen::MatrixXd a(2, 2);
    a << 2, 1, 1, 2;
    const auto s = hpd_solve<double>(a, Eigen::MatrixXd::Constant(2, 1, 3.0));
    CHECK(s.solution(0, 0) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(s.solution(1, 0) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(s.jitter == 0.0);
}

TEST_CASE("hpd_solve matches the elimination oracle on random HPD matrices") {
    std::mt19937_64 rng(11);
    std::normal_distribution<double> N;
    for (int rep = 0; rep < 20; ++rep) {
        Eigen::MatrixXcd x(6, 6);
        for (Eigen::Index i = 0; i < 36; ++i) x(i) = cdouble(N(rng), N(rng));
        const Eigen::MatrixXcd a = x * x.adjoint() + 0.5 * Eigen::MatrixXcd::Identity(6, 6);
        Eigen::MatrixXcd b(6, 2);
        for (Eigen::Index i = 0; i < 12; ++i) b(i) = cdouble(N(rng), N(rng));
        const auto s = hpd_solve<cdouble>(a, b);
        const Eigen::MatrixXcd expect = oracle::inverse<cdouble>(a) * b;
        CHECK((s.solution - expect).norm() <= 1e-8 * expect.norm());
        CHECK((a * s.solution - b).norm() <= 1e-8 * b.norm());
        CHECK(s.jitter == 0.0);

        Eigen::MatrixXd xr = x.real();
        const Eigen::MatrixXd ar = xr * xr.transpose() + 0.1 * Eigen::MatrixXd::Identity(6, 6);
        const Eigen::MatrixXd br = b.real();
        const auto sr = hpd_solve<double>(ar, br);
        CHECK((sr.solution - oracle::inverse<double>(ar) * br).norm() <= 1e-8 * sr.solution.norm());
    }
}

TEST_CASE("hpd_solve: no jitter up to condition 1e8, jitter and failure beyond") {
    Eigen::MatrixXd q = Eigen::MatrixXd::Identity(5, 5);
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(Eigen::MatrixXd::Random(5, 5));
    q = qr.householderQ();
    Eigen::VectorXd ev(5);
    ev << 1.0, 1e-2, 1e-4, 1e-6, 1e-8;
    const Eigen::MatrixXd a = q * ev.asDiagonal() * q.transpose();
    const Eigen::MatrixXd b = Eigen::MatrixXd::Ones(5, 1);
    const auto s = hpd_solve<double>(0.5 * (a + a.transpose()), b);
    CHECK(s.jitter == 0.0);
    CHECK((a * s.solution - b).norm() <= 1e-8 * b.norm());

    Eigen::MatrixXd singular = Eigen::MatrixXd::Ones(3, 3);
    const HermitianFactor<double> f(singular);
    CHECK(f.jitter() > 0.0);

    Eigen::MatrixXd indefinite = Eigen::MatrixXd::Identity(3, 3);
    indefinite(2, 2) = -1.0;
    try {
        hpd_solve<double>(indefinite, b.topRows(3));
        FAIL("expected SingularMatrixError");
    } catch (const SingularMatrixError& e) {
        CHECK(e.attempted_jitter() > 0.0);
    }
    Eigen::MatrixXd asym = Eigen::MatrixXd::Identity(2, 2);
    asym(0, 1) = 0.5;
    CHECK_THROWS_AS(hpd_solve<double>(asym, Eigen::MatrixXd::Ones(2, 1)), DomainError);
}

TEST_CASE("HermitianFactor log_det") {
    Eigen::MatrixXd a(3, 3);
    a << 4, 1, 0, 1, 3, 1, 0, 1, 2;
    CHECK(HermitianFactor<double>(a).log_det() == doctest::Approx(std::log(oracle::determinant<double>(a))).epsilon(1e-13));
}
