#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "stkrig/errors.hpp"
#include "stkrig/indeptest.hpp"
#include "stkrig/simulate.hpp"

using namespace stkrig;

TEST_CASE("null mean and variance by hand") {
    CHECK(lambda_null_mean(2, 9) == doctest::Approx(0.125).epsilon(1e-15));
    CHECK(lambda_null_variance(2, 9, 10) == doctest::Approx(0.0015625).epsilon(1e-15));
    CHECK(lambda_null_mean(3, 33) == doctest::Approx(2.0 / 32.0 + 1.0 / 31.0));
    CHECK_THROWS_AS(lambda_null_mean(1, 9), DomainError);
    CHECK_THROWS_AS(lambda_null_mean(4, 3), DomainError);
    CHECK_THROWS_AS(lambda_null_mean(3, 3), DomainError);
}

TEST_CASE("diagonal spectral matrices give Lambda = 0 exactly") {
    std::vector<Eigen::MatrixXcd> spectra;
    for (int l = 0; l < 10; ++l) {
        Eigen::MatrixXcd f = Eigen::MatrixXcd::Zero(2, 2);
        f(0, 0) = 0.3 + l;
        f(1, 1) = 2.7 / (1.0 + l);
        spectra.push_back(f);
    }
    const IndependenceTestResult r = independence_statistics(spectra, 4);
    CHECK(r.lambda_bar == 0.0);
    for (Eigen::Index l = 0; l < 10; ++l) CHECK(r.per_frequency_lambdas[l] == 1.0);
    CHECK(r.K_prime == 9);
    CHECK(r.M1 == 10);
    CHECK(r.mean_null == doctest::Approx(0.125));
    CHECK(r.var_null == doctest::Approx(0.0015625));
    CHECK(r.z_score == doctest::Approx(-0.125 / std::sqrt(0.0015625)));
    CHECK(r.repaired_blocks.empty());
}

TEST_CASE("lambda equals det F / prod f_jj from the elimination oracle") {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> N;
    std::vector<Eigen::MatrixXcd> spectra;
    for (int l = 0; l < 4; ++l) {
        Eigen::MatrixXcd x(3, 3);
        for (Eigen::Index i = 0; i < 9; ++i) x(i) = cdouble(N(rng), N(rng));
        spectra.push_back(x * x.adjoint() + 0.2 * Eigen::MatrixXcd::Identity(3, 3));
    }
    const IndependenceTestResult r = independence_statistics(spectra, 2);
    for (int l = 0; l < 4; ++l) {
        const auto& f = spectra[static_cast<std::size_t>(l)];
        const double expect = oracle::determinant<cdouble>(f).real() / (f(0, 0) * f(1, 1) * f(2, 2)).real();
        CHECK(r.per_frequency_lambdas[l] == doctest::Approx(expect).epsilon(1e-10));
        CHECK(r.per_frequency_lambdas[l] > 0.0);
        CHECK(r.per_frequency_lambdas[l] <= 1.0);
    }
    CHECK(r.lambda_bar >= 0.0);
    CHECK(r.p_value >= 0.0);
    CHECK(r.p_value <= 1.0);
}

TEST_CASE("independence_test on panels: preconditions and even n") {
    const TimeSeriesPanel one = simulate_white_panel(1, 19, 1.0, 1);
    CHECK_THROWS_AS(independence_test(one, {1}), DomainError);
    const TimeSeriesPanel three = simulate_white_panel(3, 19, 1.0, 1);
    CHECK_THROWS_AS(independence_test(three, {1}), DomainError);  // K' = 3 = m
    const TimeSeriesPanel even = simulate_white_panel(2, 20, 1.0, 2);
    const IndependenceTestResult r = independence_test(even, {1});
    CHECK(r.n_used == 19);
    CHECK(r.M1 == 3);
    CHECK(r.centers == std::vector<std::size_t>{2, 5, 8});
    CHECK_FALSE(r.warnings.empty());
    CHECK_THROWS_AS(independence_test(simulate_white_panel(2, 21, 1.0, 2), {3}), DomainError);
}

TEST_CASE("statistic is invariant to per-site scaling") {
    const TimeSeriesPanel p = simulate_white_panel(3, 199, 1.0, 4);
    Eigen::MatrixXd scaled = p.observations();
    scaled.row(0) *= -3.0;
    scaled.row(2) *= 0.01;
    const IndependenceTestResult a = independence_test(p, {4});
    const IndependenceTestResult b = independence_test(TimeSeriesPanel(p.locations(), scaled), {4});
    CHECK(b.lambda_bar == doctest::Approx(a.lambda_bar).epsilon(1e-10));
    CHECK(b.z_score == doctest::Approx(a.z_score).epsilon(1e-10));
}

TEST_CASE("default half-window") {
    CHECK(default_half_window(19, 2) == 4);
    CHECK_THROWS_AS(default_half_window(1025, 2), DomainError);  // 512 has no odd divisor > 1
}

TEST_CASE("power: a noisy duplicate site is detected") {
    int detected = 0;
    const int reps = 40;
    for (int r = 0; r < reps; ++r) {
        const TimeSeriesPanel base = simulate_white_panel(3, 397, 1.0, 100 + r);
        Eigen::MatrixXd obs = base.observations();
        const TimeSeriesPanel noise = simulate_white_panel(1, 397, 0.01, 900 + r);
        obs.row(2) = obs.row(0) + noise.observations().row(0);
        const IndependenceTestResult t = independence_test(TimeSeriesPanel(base.locations(), obs), {4});
        detected += t.z_score > 2.326;
    }
    CHECK(detected >= static_cast<int>(0.95 * reps));
}
