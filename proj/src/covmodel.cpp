#include "stkrig/covmodel.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "stkrig/errors.hpp"
#include "stkrig/numerics.hpp"

namespace stkrig {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

}  // namespace

void ModelParams::validate() const {
    if (!(sigma_e2 > 0.0) || !std::isfinite(sigma_e2)) {
        throw DomainError("ModelParams: sigma_e2 must be finite and > 0");
    }
    if (d < 1) throw DomainError("ModelParams: dimension d must be >= 1");
    if (!std::isfinite(nu) || !(bessel_order() > 0.0)) {
        throw DomainError("ModelParams: need 2 nu > d/2 (nu=" + std::to_string(nu) +
                          ", d=" + std::to_string(d) + ")");
    }
    if (!(d < 4.0 * nu + 3.0)) throw DomainError("ModelParams: need d < 4 nu + 3");
    if (!(nugget >= 0.0) || !std::isfinite(nugget)) {
        throw DomainError("ModelParams: nugget must be finite and >= 0");
    }
    if (c_coeffs.size() < 1 || !c_coeffs.allFinite()) {
        throw DomainError("ModelParams: c_coeffs must be a non-empty finite vector");
    }
    if (planar_constant && d != 2) {
        throw DomainError("ModelParams: planar_constant is only defined for d = 2");
    }
}

Eigen::VectorXd to_unconstrained(const ModelParams& params, const ParamLayout& layout) {
    params.validate();
    if (static_cast<std::size_t>(params.c_coeffs.size()) != layout.p + 1) {
        throw DomainError("to_unconstrained: c_coeffs size does not match layout p");
    }
    Eigen::VectorXd theta(static_cast<Eigen::Index>(layout.dimension()));
    Eigen::Index k = 0;
    theta[k++] = std::log(params.sigma_e2);
    if (layout.estimate_nu) {
        const double excess = params.nu - 0.25 * layout.d;
        if (!(excess > 0.0)) throw DomainError("to_unconstrained: nu must exceed d/4");
        theta[k++] = std::log(excess);
    }
    for (Eigen::Index b = 0; b < params.c_coeffs.size(); ++b) theta[k++] = params.c_coeffs[b];
    if (layout.estimate_nugget) {
        if (!(params.nugget > 0.0)) {
            throw DomainError("to_unconstrained: nugget must be > 0 when estimated");
        }
        theta[k++] = std::log(params.nugget);
    }
    return theta;
}

ModelParams from_unconstrained(const Eigen::VectorXd& theta, const ParamLayout& layout) {
    if (static_cast<std::size_t>(theta.size()) != layout.dimension()) {
        throw DomainError("from_unconstrained: vector has wrong dimension");
    }
    ModelParams params;
    params.d = layout.d;
    Eigen::Index k = 0;
    params.sigma_e2 = std::exp(theta[k++]);
    params.nu = layout.estimate_nu ? 0.25 * layout.d + std::exp(theta[k++]) : layout.fixed_nu;
    params.c_coeffs = theta.segment(k, static_cast<Eigen::Index>(layout.p + 1));
    k += static_cast<Eigen::Index>(layout.p + 1);
    params.nugget = layout.estimate_nugget ? std::exp(theta[k++]) : 0.0;
    return params;
}

double c_mod_sq(double omega, const ModelParams& params) {
    double exponent = params.c_coeffs[0];
    for (Eigen::Index k = 1; k < params.c_coeffs.size(); ++k) {
        exponent += params.c_coeffs[k] * std::cos(static_cast<double>(k) * omega);
    }
    return std::exp(exponent);
}

double scaled_bessel_k(double mu, double x) {
    const double limit_log = (mu - 1.0) * std::log(2.0) + log_gamma(mu);
    if (x <= 0.0) return std::exp(limit_log);
    double k;
    try {
        k = bessel_k(mu, x);
    } catch (const RangeError&) {
        return std::exp(limit_log);
    }
    if (k == 0.0) return 0.0;
    return std::exp(mu * std::log(x) + std::log(k));
}

double cov_zero(double omega, const ModelParams& params) {
    const double a2 = c_mod_sq(omega, params);
    if (params.planar_constant) {
        const double q = 2.0 * params.nu - 1.0;
        return params.sigma_e2 / (2.0 * std::pow(a2, q) * q);
    }
    const double mu = params.bessel_order();
    const double half_d = 0.5 * params.d;
    const double log_value = std::log(params.sigma_e2) - half_d * std::log(kTwoPi) -
                             half_d * std::log(2.0) - mu * std::log(a2) + log_gamma(mu) -
                             log_gamma(2.0 * params.nu);
    return std::exp(log_value);
}

double cov_freq(double h, double omega, const ModelParams& params) {
    if (!(h >= 0.0)) throw DomainError("cov_freq: distance must be >= 0");
    if (h == 0.0) return cov_zero(omega, params);
    const double mu = params.bessel_order();
    const double a = std::sqrt(c_mod_sq(omega, params));
    const double x = h * a;
    // (h/a)^mu K_mu(x) = x^mu K_mu(x) / a^{2 mu}
    const double log_const = std::log(params.sigma_e2) - 0.5 * params.d * std::log(kTwoPi) -
                             (2.0 * params.nu - 1.0) * std::log(2.0) -
                             log_gamma(2.0 * params.nu) - 2.0 * mu * std::log(a);
    return std::exp(log_const) * scaled_bessel_k(mu, x);
}

double corr_freq(double h, double omega, const ModelParams& params) {
    if (!(h >= 0.0)) throw DomainError("corr_freq: distance must be >= 0");
    if (h == 0.0) return 1.0;
    const double mu = params.bessel_order();
    const double x = h * std::sqrt(c_mod_sq(omega, params));
    const double norm = std::exp((mu - 1.0) * std::log(2.0) + log_gamma(mu));
    return std::min(1.0, scaled_bessel_k(mu, x) / norm);
}

double cov_freq_planar(double h, double omega, const ModelParams& params) {
    if (params.d != 2) throw DomainError("cov_freq_planar: requires d = 2");
    if (!(h > 0.0)) throw DomainError("cov_freq_planar: requires h > 0");
    const double a = std::sqrt(c_mod_sq(omega, params));
    const double order = 2.0 * params.nu - 1.0;
    return params.sigma_e2 / kTwoPi * std::pow(h / (2.0 * a), order) * bessel_k(order, a * h) /
           std::tgamma(2.0 * params.nu);
}

double st_spectral_density(const Eigen::VectorXd& lambda, double omega,
                           const ModelParams& params) {
    if (lambda.size() != params.d) {
        throw DomainError("st_spectral_density: wave-number vector must have dimension d");
    }
    const double denom = std::pow(lambda.squaredNorm() + c_mod_sq(omega, params), 2.0 * params.nu);
    return params.sigma_e2 / (std::pow(kTwoPi, params.d) * denom);
}

double variogram_model(double h, double omega, const ModelParams& params) {
    if (!(h > 0.0)) throw DomainError("variogram_model: distance must be > 0");
    return 2.0 * (cov_zero(omega, params) + params.nugget / kTwoPi - cov_freq(h, omega, params));
}

}  // namespace stkrig
