#include "stkrig/simulate.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <string>
#include <vector>
#include <algorithm>

#include "stkrig/errors.hpp"
#include "stkrig/numerics.hpp"
#include "stkrig/parallel.hpp"

namespace stkrig {

namespace {

// Independent stream per (seed, purpose, index).
std::mt19937_64 make_stream(std::uint64_t seed, std::uint64_t purpose, std::uint64_t index) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(purpose), static_cast<std::uint32_t>(index),
                      static_cast<std::uint32_t>(index >> 32)};
    return std::mt19937_64(seq);
}

constexpr std::uint64_t kFrequencyStream = 1;
constexpr std::uint64_t kNoiseStream = 2;
constexpr std::uint64_t kWhiteStream = 3;

}  // namespace

Eigen::MatrixXd frequency_covariance(const Eigen::MatrixXd& locations, double omega,
                                     const ModelParams& params) {
    const Eigen::Index m = locations.rows();
    Eigen::MatrixXd f(m, m);
    for (Eigen::Index i = 0; i < m; ++i) {
        f(i, i) = cov_zero(omega, params);
        for (Eigen::Index j = 0; j < i; ++j) {
            const double h = (locations.row(i) - locations.row(j)).norm();
            f(i, j) = f(j, i) = cov_freq(h, omega, params);
        }
    }
    return f;
}

TimeSeriesPanel simulate_panel(const SimulationSpec& spec, SimulationReport* report) {
    spec.params.validate();
    if (spec.n < 8) throw DomainError("simulate_panel: n must be >= 8");
    const Eigen::Index m = spec.locations.rows();
    if (m < 1) throw DomainError("simulate_panel: need at least one location");
    if (spec.locations.cols() != spec.params.d) {
        throw DomainError("simulate_panel: location dimension does not match params.d");
    }
    const std::size_t n = spec.n;
    const std::size_t half = n / 2;

    // Column k holds J(w_k), k = 0..floor(n/2).
    Eigen::MatrixXcd coeffs(m, static_cast<Eigen::Index>(half + 1));
    std::vector<double> jitters(half + 1, 0.0);
    parallel_for(half + 1, spec.threads, [&](std::size_t k) {
        const double omega = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n);
        const HermitianFactor<double> factor(frequency_covariance(spec.locations, omega, spec.params));
        jitters[k] = factor.jitter();
        auto rng = make_stream(spec.seed, kFrequencyStream, k);
        std::normal_distribution<double> normal(0.0, 1.0);
        const bool real_ordinate = k == 0 || (n % 2 == 0 && k == half);
        Eigen::VectorXcd z(m);
        for (Eigen::Index i = 0; i < m; ++i) {
            if (real_ordinate) {
                z[i] = cdouble(normal(rng), 0.0);
            } else {
                const double re = normal(rng) * std::numbers::sqrt2 / 2.0;
                const double im = normal(rng) * std::numbers::sqrt2 / 2.0;
                z[i] = cdouble(re, im);
            }
        }
        coeffs.col(static_cast<Eigen::Index>(k)) = factor.lower().cast<cdouble>() * z;
    });

    if (report) {
        *report = {};
        for (const double j : jitters) {
            if (j > 0.0) ++report->jittered_frequencies;
            report->max_jitter = std::max(report->max_jitter, j);
        }
    }

    const DftPlan plan(n);
    Eigen::MatrixXd observations(m, static_cast<Eigen::Index>(n));
    parallel_for(static_cast<std::size_t>(m), spec.threads, [&](std::size_t site) {
        const auto row = static_cast<Eigen::Index>(site);
        Eigen::VectorXcd full(static_cast<Eigen::Index>(n));
        for (std::size_t k = 0; k <= half; ++k) full[static_cast<Eigen::Index>(k)] = coeffs(row, static_cast<Eigen::Index>(k));
        for (std::size_t k = half + 1; k < n; ++k) {
            full[static_cast<Eigen::Index>(k)] = std::conj(coeffs(row, static_cast<Eigen::Index>(n - k)));
        }
        double residue = 0.0;
        Eigen::VectorXd series = plan.inverse_full(full, &residue);
        if (spec.include_measurement_error && spec.params.nugget > 0.0) {
            auto rng = make_stream(spec.seed, kNoiseStream, site);
            std::normal_distribution<double> noise(0.0, std::sqrt(spec.params.nugget));
            for (Eigen::Index t = 0; t < series.size(); ++t) series[t] += noise(rng);
        }
        observations.row(row) = series.transpose();
    });
    return {spec.locations, std::move(observations)};
}

TimeSeriesPanel simulate_white_panel(std::size_t m, std::size_t n, double sigma2,
                                     std::uint64_t seed) {
    if (m < 1) throw DomainError("simulate_white_panel: m must be >= 1");
    if (!(sigma2 > 0.0)) throw DomainError("simulate_white_panel: sigma2 must be > 0");
    Eigen::MatrixXd locations = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(m), 2);
    Eigen::MatrixXd observations(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < m; ++i) {
        locations(static_cast<Eigen::Index>(i), 0) = static_cast<double>(i);
        auto rng = make_stream(seed, kWhiteStream, i);
        std::normal_distribution<double> normal(0.0, std::sqrt(sigma2));
        for (std::size_t t = 0; t < n; ++t) {
            observations(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(t)) = normal(rng);
        }
    }
    return {std::move(locations), std::move(observations)};
}

}  // namespace stkrig
