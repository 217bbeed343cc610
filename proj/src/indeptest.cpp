#include "stkrig/indeptest.hpp"

#include <cmath>
#include <string>
#include <utility>

#include "stkrig/errors.hpp"
#include "stkrig/parallel.hpp"

namespace stkrig {

namespace {

void check_dimensions(std::size_t m, std::size_t K_prime) {
    if (m < 2) throw DomainError("independence test needs at least 2 sites");
    if (K_prime <= m) {
        throw DomainError("independence test needs K' = 2K+1 > m (the null mean divides by K' - j, j < m); got K' = " +
                          std::to_string(K_prime) + ", m = " + std::to_string(m));
    }
}

}  // namespace

double lambda_null_mean(std::size_t m, std::size_t K_prime) {
    check_dimensions(m, K_prime);
    double acc = 0.0;
    for (std::size_t j = 1; j < m; ++j) acc += static_cast<double>(m - j) / static_cast<double>(K_prime - j);
    return acc;
}

double lambda_null_variance(std::size_t m, std::size_t K_prime, std::size_t M1) {
    check_dimensions(m, K_prime);
    if (M1 == 0) throw DomainError("lambda_null_variance: M1 must be positive");
    double acc = 0.0;
    for (std::size_t j = 1; j < m; ++j) {
        const double denom = static_cast<double>(K_prime - j);
        acc += static_cast<double>(m - j) / (denom * denom);
    }
    return acc / static_cast<double>(M1);
}

std::size_t default_half_window(std::size_t n, std::size_t m) {
    for (std::size_t K : admissible_half_windows(n)) {
        if (2 * K + 1 >= 2 * m) return K;
    }
    throw DomainError("no admissible K with 2K+1 >= " + std::to_string(2 * m) + " for n = " +
                      std::to_string(n) + "; pass K explicitly");
}

IndependenceTestResult independence_statistics(const std::vector<Eigen::MatrixXcd>& spectra,
                                               std::size_t K, unsigned threads) {
    if (spectra.empty()) throw DomainError("independence_statistics: no frequency blocks");
    const auto m = static_cast<std::size_t>(spectra.front().rows());
    IndependenceTestResult out;
    out.K = K;
    out.K_prime = 2 * K + 1;
    out.M1 = spectra.size();
    out.mean_null = lambda_null_mean(m, out.K_prime);
    out.var_null = lambda_null_variance(m, out.K_prime, out.M1);

    out.per_frequency_lambdas.resize(static_cast<Eigen::Index>(out.M1));
    std::vector<double> jitter(out.M1, 0.0);
    parallel_for(out.M1, threads, [&](std::size_t l) {
        const Eigen::MatrixXcd& f = spectra[l];
        if (static_cast<std::size_t>(f.rows()) != m || f.cols() != f.rows()) {
            throw DomainError("independence_statistics: spectral matrices must all be " +
                              std::to_string(m) + " x " + std::to_string(m));
        }
        // Coherence matrix D^{-1/2} F D^{-1/2}: det equals det F / prod f_jj.
        Eigen::VectorXd scale(static_cast<Eigen::Index>(m));
        for (Eigen::Index j = 0; j < f.rows(); ++j) {
            const double d = f(j, j).real();
            if (!(d > 0.0)) throw DomainError("independence_statistics: non-positive auto-spectrum");
            scale[j] = 1.0 / std::sqrt(d);
        }
        Eigen::MatrixXcd r = scale.asDiagonal() * (0.5 * (f + f.adjoint())) * scale.asDiagonal();
        r.diagonal().setOnes();
        const HermitianFactor<cdouble> factor(r);
        jitter[l] = factor.jitter();
        out.per_frequency_lambdas[static_cast<Eigen::Index>(l)] = std::exp(factor.log_det());
    });

    double log_sum = 0.0;
    for (std::size_t l = 0; l < out.M1; ++l) {
        log_sum += std::log(out.per_frequency_lambdas[static_cast<Eigen::Index>(l)]);
        if (jitter[l] > 0.0) out.repaired_blocks.push_back(l + 1);
    }
    out.lambda_bar = -log_sum / static_cast<double>(out.M1);
    out.z_score = (out.lambda_bar - out.mean_null) / std::sqrt(out.var_null);
    out.p_value = 0.5 * std::erfc(out.z_score / std::sqrt(2.0));
    if (!out.repaired_blocks.empty()) {
        out.warnings.push_back(std::to_string(out.repaired_blocks.size()) +
                               " spectral matrices needed diagonal jitter to factor");
    }
    return out;
}

IndependenceTestResult independence_test(const TimeSeriesPanel& panel, const IndependenceConfig& config) {
    const std::size_t m = panel.sites();
    if (m < 2) throw DomainError("independence test needs at least 2 sites");
    std::vector<std::string> warnings;
    const TimeSeriesPanel* used = &panel;
    TimeSeriesPanel trimmed;
    if (panel.length() % 2 == 0) {
        trimmed = panel.truncated(panel.length() - 1);
        used = &trimmed;
        warnings.push_back("even n = " + std::to_string(panel.length()) +
                           ": dropped the last observation");
    }
    const std::size_t n = used->length();
    const std::size_t K = config.K ? *config.K : default_half_window(n, m);
    check_dimensions(m, 2 * K + 1);
    const FrequencyPartition partition = partition_frequencies(n, K, config.policy);
    if (partition.unused > 0) {
        warnings.push_back(std::to_string(partition.unused) + " trailing frequencies left out of the blocks");
    }

    const SpectralPanel spectral = dft_panel(*used, /*remove_mean=*/true, config.threads);
    std::vector<Eigen::MatrixXcd> spectra(partition.M1, Eigen::MatrixXcd::Zero(
        static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m)));
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = i; j < m; ++j) {
            const Eigen::VectorXcd f = smoothed_cross_spectrum(spectral, i, j, partition);
            for (std::size_t l = 0; l < partition.M1; ++l) {
                const auto ii = static_cast<Eigen::Index>(i), jj = static_cast<Eigen::Index>(j);
                spectra[l](ii, jj) = f[static_cast<Eigen::Index>(l)];
                spectra[l](jj, ii) = std::conj(f[static_cast<Eigen::Index>(l)]);
            }
        }
    }
    IndependenceTestResult out = independence_statistics(spectra, K, config.threads);
    out.n_used = n;
    out.centers = partition.centers;
    warnings.insert(warnings.end(), out.warnings.begin(), out.warnings.end());
    out.warnings = std::move(warnings);
    return out;
}

}  // namespace stkrig
