#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "stkrig/numerics.hpp"
#include "stkrig/spectral.hpp"

namespace stkrig {

struct IndependenceTestResult {
    double lambda_bar = 0.0;                  // -M1^{-1} sum_l ln lambda_l
    Eigen::VectorXd per_frequency_lambdas;    // det F / prod f_jj, l = 1..M1
    double mean_null = 0.0;
    double var_null = 0.0;
    double z_score = 0.0;
    double p_value = 1.0;                     // P(N(0,1) > z)
    std::size_t K = 0;
    std::size_t K_prime = 0;
    std::size_t M1 = 0;
    std::size_t n_used = 0;
    std::vector<std::size_t> centers;
    std::vector<std::size_t> repaired_blocks;  // blocks that needed diagonal jitter
    std::vector<std::string> warnings;
};

struct IndependenceConfig {
    std::optional<std::size_t> K;              // empty -> default_half_window
    PartitionPolicy policy = PartitionPolicy::Strict;
    unsigned threads = 1;
};

/// E(Lambda) = sum_{j=1}^{m-1} (m - j) / (K' - j).
double lambda_null_mean(std::size_t m, std::size_t K_prime);
/// var(Lambda) = M1^{-1} sum_{j=1}^{m-1} (m - j) / (K' - j)^2.
double lambda_null_variance(std::size_t m, std::size_t K_prime, std::size_t M1);

/// Smallest admissible K with 2K + 1 >= 2m; throws DomainError when none exists.
std::size_t default_half_window(std::size_t n, std::size_t m);

/// Statistics from per-block spectral matrices (each m x m Hermitian).
IndependenceTestResult independence_statistics(const std::vector<Eigen::MatrixXcd>& spectra,
                                               std::size_t K, unsigned threads = 1);

/// Mean-centres each site, drops the last point when n is even, smooths the
/// cross-periodograms over blocks of 2K+1 frequencies and tests H0: the m
/// series are mutually independent.
IndependenceTestResult independence_test(const TimeSeriesPanel& panel,
                                         const IndependenceConfig& config = {});

}  // namespace stkrig
