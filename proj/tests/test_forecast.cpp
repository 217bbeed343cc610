#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "stkrig/errors.hpp"
#include "stkrig/krige.hpp"

using namespace stkrig;

namespace {

Eigen::VectorXd ar_series(const std::vector<double>& phi, std::size_t n, std::uint64_t seed, double mean = 0.0) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> N;
    const std::size_t burn = 500;
    std::vector<double> x(n + burn, 0.0);
    for (std::size_t t = 0; t < x.size(); ++t) {
        double v = N(rng);
        for (std::size_t j = 0; j < phi.size(); ++j) {
            if (t > j) v += phi[j] * x[t - 1 - j];
        }
        x[t] = v;
    }
    Eigen::VectorXd out(static_cast<Eigen::Index>(n));
    for (std::size_t t = 0; t < n; ++t) out[static_cast<Eigen::Index>(t)] = x[burn + t] + mean;
    return out;
}

}  // namespace

TEST_CASE("stationarity check and root reflection") {
    CHECK(is_stationary(Eigen::VectorXd::Constant(1, 0.5)));
    CHECK_FALSE(is_stationary(Eigen::VectorXd::Constant(1, 1.5)));
    Eigen::VectorXd c = Eigen::VectorXd::Constant(1, 2.0);
    CHECK(reflect_to_stationary(c));
    CHECK(c[0] == doctest::Approx(0.5));
    // (1 - 2z)(1 - 0.5z) = 1 - 2.5 z + z^2 -> psi = (2.5, -1); reflected to (1 - 0.5z)^2.
    Eigen::VectorXd two(2);
    two << 2.5, -1.0;
    CHECK(reflect_to_stationary(two));
    CHECK(two[0] == doctest::Approx(1.0));
    CHECK(two[1] == doctest::Approx(-0.25));
    CHECK(is_stationary(two));
    Eigen::VectorXd ok(2);
    ok << 0.3, 0.2;
    CHECK_FALSE(reflect_to_stationary(ok));
}

TEST_CASE("AR(1) coefficient recovered") {
    std::vector<double> psi;
    for (int r = 0; r < 30; ++r) {
        const Eigen::VectorXd x = ar_series({0.6}, 512, 10 + r);
        psi.push_back(fit_ar_whittle(x.array() - x.mean(), 1).coefficients[0]);
    }
    CHECK(std::abs(oracle::median(psi) - 0.6) <= 0.1);
}

TEST_CASE("AR(2) fit is stationary and near the truth") {
    const Eigen::VectorXd x = ar_series({0.5, -0.3}, 2000, 3);
    const ArCandidate c = fit_ar_whittle(x.array() - x.mean(), 2);
    CHECK(is_stationary(c.coefficients));
    CHECK(c.coefficients[0] == doctest::Approx(0.5).epsilon(0.1));
    CHECK(c.coefficients[1] == doctest::Approx(-0.3).epsilon(0.15));
    CHECK(c.innovation_variance == doctest::Approx(1.0).epsilon(0.1));
    CHECK(c.aic == doctest::Approx(2.0 * c.whittle + 4.0));
}

TEST_CASE("forecast recursion, mean and MSE accumulation") {
    const Eigen::VectorXd x = ar_series({0.7}, 400, 5, 10.0);
    const ForecastOutput f = forecast(x, 6, 3);
    REQUIRE(f.forecasts.size() == 6);
    REQUIRE(f.ar_order >= 1);
    CHECK(f.mean == doctest::Approx(x.mean()));
    // One-step forecast by the recursion.
    double one = f.mean;
    for (Eigen::Index j = 0; j < f.ar_coefficients.size(); ++j) {
        one += f.ar_coefficients[j] * (x[x.size() - 1 - j] - f.mean);
    }
    CHECK(f.forecasts[0] == doctest::Approx(one).epsilon(1e-12));
    CHECK(f.forecast_mse[0] == doctest::Approx(f.innovation_variance));
    for (Eigen::Index h = 1; h < 6; ++h) CHECK(f.forecast_mse[h] >= f.forecast_mse[h - 1]);
    if (f.ar_order == 1) {
        const double p = f.ar_coefficients[0];
        CHECK(f.forecast_mse[1] == doctest::Approx(f.innovation_variance * (1.0 + p * p)));
    }
    CHECK(f.candidates.size() == 4);
}

TEST_CASE("white noise forecasts the mean; V = 0 is valid; short series rejected") {
    std::mt19937_64 rng(1);
    std::normal_distribution<double> N(3.0, 1.0);
    Eigen::VectorXd x(256);
    for (auto& v : x) v = N(rng);
    const ForecastOutput f = forecast(x, 3, 0);
    CHECK(f.ar_order == 0);
    for (Eigen::Index h = 0; h < 3; ++h) CHECK(f.forecasts[h] == doctest::Approx(x.mean()));
    CHECK(f.forecast_mse[2] == doctest::Approx(f.innovation_variance));
    CHECK(forecast(x, 0, 2).forecasts.size() == 0);
    CHECK_THROWS_AS(forecast(x.head(10), 2, 3), DomainError);
}
