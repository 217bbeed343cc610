#pragma once

#include <cstddef>

#include <Eigen/Core>

namespace stkrig {

/// Parameters of the space-frequency covariance
///
///   C(h, w) = sigma_e2 / ((2 pi)^{d/2} 2^{2 nu - 1} Gamma(2 nu))
///             * (h / |c(w)|)^{2 nu - d/2} K_{2 nu - d/2}(h |c(w)|)
///
/// with |c(w)|^2 = exp(b0 + sum_k b_k cos(k w)).
struct ModelParams {
    double sigma_e2 = 1.0;
    double nu = 1.0;
    Eigen::VectorXd c_coeffs = Eigen::VectorXd::Zero(1);  // (b0, ..., bp)
    double nugget = 0.0;                                   // sigma_eta^2
    int d = 2;
    // Use the d = 2 closed-form C(0, w) constant that is larger by 2 pi than
    // the h -> 0 limit of C(h, w). Off by default.
    bool planar_constant = false;

    /// Order of the Bessel function, 2 nu - d/2 (> 0 for valid params).
    double bessel_order() const noexcept { return 2.0 * nu - 0.5 * d; }

    /// Throws DomainError unless sigma_e2 > 0, 2 nu > d/2, d < 4 nu + 3,
    /// nugget >= 0 and c_coeffs is non-empty and finite.
    void validate() const;
};

/// Which ModelParams entries are free in the unconstrained coordinates
/// (log sigma_e2, [tau: nu = d/4 + e^tau], b0..bp, [log nugget]).
struct ParamLayout {
    std::size_t p = 1;             // number of cosine terms; c_coeffs has p + 1 entries
    bool estimate_nu = false;
    double fixed_nu = 1.0;         // used when !estimate_nu
    bool estimate_nugget = false;
    int d = 2;

    std::size_t dimension() const noexcept {
        return 1 + (estimate_nu ? 1 : 0) + (p + 1) + (estimate_nugget ? 1 : 0);
    }
};

Eigen::VectorXd to_unconstrained(const ModelParams& params, const ParamLayout& layout);
ModelParams from_unconstrained(const Eigen::VectorXd& theta, const ParamLayout& layout);

/// |c(w)|^2 = exp(b0 + sum_k b_k cos k w).
double c_mod_sq(double omega, const ModelParams& params);

/// C(h, w); h = 0 returns cov_zero.
double cov_freq(double h, double omega, const ModelParams& params);

/// C(0, w) = g(w), the spectral density of every site series.
double cov_zero(double omega, const ModelParams& params);

/// rho(h, w) = C(h, w) / C(0, w), evaluated from its own closed form.
double corr_freq(double h, double omega, const ModelParams& params);

/// d = 2 closed form written with (h / 2|c|)^{2 nu - 1} K_{2 nu - 1}(|c| h) / Gamma(2 nu);
/// an independent code path used to cross-check cov_freq. Requires d = 2, h > 0.
double cov_freq_planar(double h, double omega, const ModelParams& params);

/// f(lambda, w) = sigma_e2 / ((2 pi)^d (|lambda|^2 + |c(w)|^2)^{2 nu}).
double st_spectral_density(const Eigen::VectorXd& lambda, double omega, const ModelParams& params);

/// 2 [C(0, w) + nugget / (2 pi) - C(h, w)], h > 0.
double variogram_model(double h, double omega, const ModelParams& params);

/// x^mu K_mu(x), continued to its x -> 0 limit 2^{mu-1} Gamma(mu) where K overflows.
double scaled_bessel_k(double mu, double x);

}  // namespace stkrig
