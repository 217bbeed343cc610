#include "stkrig/krige.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "stkrig/errors.hpp"
#include "stkrig/parallel.hpp"

namespace stkrig {

KrigingSystem assemble_system(const Eigen::MatrixXd& locations, const Eigen::VectorXd& target,
                              double omega, const ModelParams& params,
                              bool target_includes_noise) {
    if (target.size() != locations.cols()) {
        throw DomainError("assemble_system: target has dimension " + std::to_string(target.size()) +
                          ", sites have " + std::to_string(locations.cols()));
    }
    const Eigen::Index m = locations.rows();
    const double c0 = cov_zero(omega, params);
    const double noise = params.nugget / (2.0 * std::numbers::pi);

    KrigingSystem system;
    system.F.resize(m, m);
    system.G0.resize(m);
    for (Eigen::Index i = 0; i < m; ++i) {
        system.F(i, i) = c0 + noise;
        for (Eigen::Index j = 0; j < i; ++j) {
            const double h = (locations.row(i) - locations.row(j)).norm();
            system.F(i, j) = system.F(j, i) = cov_freq(h, omega, params);
        }
        system.G0[i] = cov_freq((locations.row(i).transpose() - target).norm(), omega, params);
    }
    system.c0 = target_includes_noise ? c0 + noise : c0;
    return system;
}

FrequencyPrediction predict_frequency(const KrigingSystem& system, const Eigen::VectorXcd& observed) {
    if (observed.size() != system.G0.size()) {
        throw DomainError("predict_frequency: observation vector has wrong length");
    }
    const HermitianFactor<double> factor(system.F);
    FrequencyPrediction out;
    out.weights = factor.solve(system.G0);
    out.jitter = factor.jitter();
    out.value = (out.weights.cast<cdouble>().transpose() * observed)(0);
    double mse = system.c0 - out.weights.dot(system.G0);
    if (mse < 0.0) {
        mse = 0.0;
        out.mse_clamped = true;
    } else if (mse > system.c0) {
        mse = system.c0;
        out.mse_clamped = true;
    }
    out.mse = mse;
    return out;
}

double idw_site_mean(const Eigen::MatrixXd& locations, const Eigen::VectorXd& site_means,
                     const Eigen::VectorXd& target) {
    double weight_sum = 0.0;
    double acc = 0.0;
    for (Eigen::Index i = 0; i < locations.rows(); ++i) {
        const double h = (locations.row(i).transpose() - target).norm();
        if (h == 0.0) return site_means[i];
        weight_sum += 1.0 / h;
        acc += site_means[i] / h;
    }
    return acc / weight_sum;
}

Eigen::VectorXd reconstruct_series(const Eigen::VectorXcd& predicted_dft, std::size_t n,
                                   double site_mean, cdouble nyquist, double* imag_residue) {
    if (n < 2) throw DomainError("reconstruct_series: n must be >= 2");
    const std::size_t interior = (n - 1) / 2;
    if (static_cast<std::size_t>(predicted_dft.size()) != interior) {
        throw DomainError("reconstruct_series: expected " + std::to_string(interior) +
                          " interior coefficients, got " + std::to_string(predicted_dft.size()));
    }
    Eigen::VectorXcd full = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(n));
    for (std::size_t k = 1; k <= interior; ++k) {
        full[static_cast<Eigen::Index>(k)] = predicted_dft[static_cast<Eigen::Index>(k - 1)];
        full[static_cast<Eigen::Index>(n - k)] = std::conj(predicted_dft[static_cast<Eigen::Index>(k - 1)]);
    }
    if (n % 2 == 0) full[static_cast<Eigen::Index>(n / 2)] = cdouble(nyquist.real(), 0.0);
    const DftPlan plan(n);
    double residue = 0.0;
    Eigen::VectorXd series = plan.inverse_full(full, &residue);
    if (imag_residue) *imag_residue = residue;
    series.array() += site_mean;
    return series;
}

KrigingOutput predict_dft(const SpectralPanel& spectral, const Eigen::MatrixXd& locations,
                          const Eigen::VectorXd& target, const ModelParams& params,
                          const KrigeConfig& config) {
    params.validate();
    if (static_cast<std::size_t>(locations.rows()) != spectral.sites()) {
        throw DomainError("predict_dft: location count does not match the spectral panel");
    }
    const std::size_t grid = spectral.grid_size();
    KrigingOutput out;
    out.target = target;
    out.frequencies = spectral.frequencies;
    out.predicted_dft = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(grid));
    out.mse = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(grid));
    out.jitter.assign(grid, 0.0);
    out.failure_messages.assign(grid, {});
    std::vector<char> failed(grid, 0), clamped(grid, 0);

    parallel_for(grid, config.threads, [&](std::size_t k) {
        const auto col = static_cast<Eigen::Index>(k);
        const double omega = spectral.frequencies[col];
        const KrigingSystem system =
            assemble_system(locations, target, omega, params, config.target_includes_noise);
        try {
            const FrequencyPrediction p = predict_frequency(system, spectral.dft.col(col));
            out.predicted_dft[col] = p.value;
            out.mse[col] = p.mse;
            out.jitter[k] = p.jitter;
            clamped[k] = p.mse_clamped;
        } catch (const SingularMatrixError& e) {
            failed[k] = 1;
            out.mse[col] = system.c0;
            out.jitter[k] = e.attempted_jitter();
            out.failure_messages[k] = e.what();
        }
    });
    out.failed.assign(failed.begin(), failed.end());
    out.clamped_mse = static_cast<std::size_t>(std::count(clamped.begin(), clamped.end(), 1));

    if (spectral.n % 2 == 0 && spectral.nyquist.size() == static_cast<Eigen::Index>(spectral.sites())) {
        const KrigingSystem system = assemble_system(locations, target, std::numbers::pi, params,
                                                     config.target_includes_noise);
        try {
            out.nyquist = cdouble(predict_frequency(system, spectral.nyquist).value.real(), 0.0);
        } catch (const SingularMatrixError&) {
            out.nyquist = {0.0, 0.0};
        }
    }
    return out;
}

KrigingOutput krige(const TimeSeriesPanel& panel, const Eigen::VectorXd& target,
                    const ModelParams& params, const KrigeConfig& config) {
    const SpectralPanel spectral = dft_panel(panel, /*remove_mean=*/true, config.threads);
    KrigingOutput out = predict_dft(spectral, panel.locations(), target, params, config);
    out.site_mean = idw_site_mean(panel.locations(), spectral.site_means, target);
    out.reconstructed =
        reconstruct_series(out.predicted_dft, spectral.n, out.site_mean, out.nyquist, &out.imag_residue);
    return out;
}

}  // namespace stkrig
