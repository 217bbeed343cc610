#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "stkrig/covmodel.hpp"
#include "stkrig/numerics.hpp"
#include "stkrig/spectral.hpp"

namespace stkrig {

/// Per-frequency conditional Gaussian system: Cov(J_m) = F, Cov(J_m, J_0) = G0,
/// Var(J_0) = c0.
struct KrigingSystem {
    Eigen::MatrixXd F;
    Eigen::VectorXd G0;
    double c0 = 0.0;
};

/// F has C(0, w) + nugget / (2 pi) on its diagonal and C(|s_i - s_j|, w) off
/// it; G0_i = C(|s_0 - s_i|, w). c0 adds the nugget term only when
/// `target_includes_noise` (default: predict the noise-free signal).
KrigingSystem assemble_system(const Eigen::MatrixXd& locations, const Eigen::VectorXd& target,
                              double omega, const ModelParams& params,
                              bool target_includes_noise = false);

struct FrequencyPrediction {
    cdouble value;
    double mse = 0.0;
    double jitter = 0.0;
    bool mse_clamped = false;
    Eigen::VectorXd weights;
};

/// J0_hat = w' J_m and mse = c0 - w' G0 with w = F^{-1} G0 (mse clamped to [0, c0]).
FrequencyPrediction predict_frequency(const KrigingSystem& system, const Eigen::VectorXcd& observed);

struct KrigeConfig {
    bool target_includes_noise = false;
    unsigned threads = 1;
};

struct KrigingOutput {
    Eigen::VectorXd target;
    Eigen::VectorXd frequencies;
    Eigen::VectorXcd predicted_dft;  // over the interior grid
    Eigen::VectorXd mse;
    std::vector<double> jitter;      // absolute diagonal jitter per frequency
    std::vector<bool> failed;        // singular F even after jitter
    std::vector<std::string> failure_messages;
    std::size_t clamped_mse = 0;
    cdouble nyquist{0.0, 0.0};       // predicted J0(pi) for even n
    double site_mean = 0.0;
    Eigen::VectorXd reconstructed;   // length n
    double imag_residue = 0.0;
};

/// Predicts J_0(w_k) on the whole interior grid of `spectral`.
KrigingOutput predict_dft(const SpectralPanel& spectral, const Eigen::MatrixXd& locations,
                          const Eigen::VectorXd& target, const ModelParams& params,
                          const KrigeConfig& config = {});

/// Inverse DFT of the interior-grid prediction with w = 0 set to 0 and the
/// Nyquist ordinate (even n) set to `nyquist`, plus `site_mean`.
Eigen::VectorXd reconstruct_series(const Eigen::VectorXcd& predicted_dft, std::size_t n,
                                   double site_mean, cdouble nyquist = {0.0, 0.0},
                                   double* imag_residue = nullptr);

/// Inverse-distance-weighted mean of the site means; a coincident site wins outright.
double idw_site_mean(const Eigen::MatrixXd& locations, const Eigen::VectorXd& site_means,
                     const Eigen::VectorXd& target);

/// Full pipeline: centred DFT panel, per-frequency prediction, reconstruction.
KrigingOutput krige(const TimeSeriesPanel& panel, const Eigen::VectorXd& target,
                    const ModelParams& params, const KrigeConfig& config = {});

// ---------------------------------------------------------------------------
// AR forecasting of a (reconstructed) series by Whittle likelihood
// ---------------------------------------------------------------------------

struct ArCandidate {
    std::size_t order = 0;
    Eigen::VectorXd coefficients;
    double innovation_variance = 0.0;
    double whittle = 0.0;  // sum_k [ln g + I / g] over the interior grid
    double aic = 0.0;      // 2 whittle + 2 p
};

struct ForecastOutput {
    std::size_t ar_order = 0;
    Eigen::VectorXd ar_coefficients;  // psi_1..psi_p
    double innovation_variance = 0.0;
    double mean = 0.0;
    Eigen::VectorXd forecasts;        // horizons 1..V
    Eigen::VectorXd forecast_mse;
    std::vector<ArCandidate> candidates;
    std::vector<std::string> warnings;
};

/// Fits AR(p) spectra sigma^2/(2 pi) |1 - sum_j psi_j e^{-i j w}|^{-2} for
/// p = 0..p_max, selects p by AIC and forecasts V steps ahead.
ForecastOutput forecast(const Eigen::VectorXd& series, std::size_t horizons, std::size_t p_max);

/// Whittle fit of a single AR(p) model to a mean-removed series.
ArCandidate fit_ar_whittle(const Eigen::VectorXd& centered, std::size_t order,
                           std::vector<std::string>* warnings = nullptr);

/// Replaces AR polynomial roots inside the unit circle by their reciprocals.
/// Returns true when any root was reflected.
bool reflect_to_stationary(Eigen::VectorXd& coefficients);

/// True when every root of 1 - sum psi_j z^j lies strictly outside the unit circle.
bool is_stationary(const Eigen::VectorXd& coefficients);

}  // namespace stkrig
