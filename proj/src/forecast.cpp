#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include "stkrig/errors.hpp"
#include "stkrig/krige.hpp"

namespace stkrig {

namespace {

// Roots lambda of lambda^p - psi_1 lambda^{p-1} - ... - psi_p (inverse roots of the AR polynomial).
Eigen::VectorXcd inverse_roots(const Eigen::VectorXd& psi) {
    const Eigen::Index p = psi.size();
    Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(p, p);
    companion.row(0) = psi.transpose();
    for (Eigen::Index i = 1; i < p; ++i) companion(i, i - 1) = 1.0;
    return Eigen::EigenSolver<Eigen::MatrixXd>(companion, false).eigenvalues();
}

// Coefficients psi from inverse roots: prod (lambda - r_i) = lambda^p - sum psi_j lambda^{p-j}.
Eigen::VectorXd from_inverse_roots(const Eigen::VectorXcd& roots) {
    std::vector<cdouble> poly{cdouble(1.0, 0.0)};
    for (Eigen::Index i = 0; i < roots.size(); ++i) {
        std::vector<cdouble> next(poly.size() + 1, cdouble(0.0, 0.0));
        for (std::size_t j = 0; j < poly.size(); ++j) {
            next[j] += poly[j];
            next[j + 1] -= poly[j] * roots[i];
        }
        poly.swap(next);
    }
    Eigen::VectorXd psi(roots.size());
    for (Eigen::Index j = 0; j < roots.size(); ++j) psi[j] = -poly[static_cast<std::size_t>(j + 1)].real();
    return psi;
}

Eigen::VectorXd pacf_to_ar(const Eigen::VectorXd& pacf) {
    const Eigen::Index p = pacf.size();
    Eigen::VectorXd psi = Eigen::VectorXd::Zero(p);
    for (Eigen::Index k = 0; k < p; ++k) {
        const Eigen::VectorXd prev = psi;
        for (Eigen::Index j = 0; j < k; ++j) psi[j] = prev[j] - pacf[k] * prev[k - 1 - j];
        psi[k] = pacf[k];
    }
    return psi;
}

Eigen::VectorXd ar_to_pacf(Eigen::VectorXd psi) {
    const Eigen::Index p = psi.size();
    Eigen::VectorXd pacf(p);
    for (Eigen::Index k = p - 1; k >= 0; --k) {
        const double a = psi[k];
        pacf[k] = a;
        const double denom = 1.0 - a * a;
        const Eigen::VectorXd prev = psi;
        for (Eigen::Index j = 0; j < k; ++j) psi[j] = (prev[j] + a * prev[k - 1 - j]) / denom;
    }
    return pacf;
}

struct Periodogram {
    Eigen::VectorXd omega;
    Eigen::VectorXd values;
};

Periodogram interior_periodogram(const Eigen::VectorXd& series) {
    const auto n = static_cast<std::size_t>(series.size());
    const std::size_t M = (n - 1) / 2;
    const DftPlan plan(n);
    const Eigen::VectorXcd j = plan.forward(std::span<const double>(series.data(), n), 1, M);
    Periodogram out;
    out.values = j.cwiseAbs2();
    out.omega.resize(static_cast<Eigen::Index>(M));
    for (std::size_t k = 1; k <= M; ++k) {
        out.omega[static_cast<Eigen::Index>(k - 1)] =
            2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n);
    }
    return out;
}

// |1 - sum_j psi_j e^{-i j w}|^2 at every grid frequency.
Eigen::VectorXd transfer_mod_sq(const Eigen::VectorXd& psi, const Eigen::VectorXd& omega) {
    Eigen::VectorXd out(omega.size());
    for (Eigen::Index k = 0; k < omega.size(); ++k) {
        cdouble a(1.0, 0.0);
        for (Eigen::Index j = 0; j < psi.size(); ++j) {
            a -= psi[j] * std::polar(1.0, -static_cast<double>(j + 1) * omega[k]);
        }
        out[k] = std::norm(a);
    }
    return out;
}

// Whittle criterion with sigma^2 profiled out; also returns sigma^2.
double profiled_whittle(const Eigen::VectorXd& psi, const Periodogram& pg, double* sigma2) {
    const Eigen::VectorXd a2 = transfer_mod_sq(psi, pg.omega);
    const auto M = static_cast<double>(pg.values.size());
    const double s = pg.values.dot(a2);
    const double scale = s / M;  // sigma^2 / (2 pi)
    if (sigma2) *sigma2 = 2.0 * std::numbers::pi * scale;
    if (!(scale > 0.0)) return std::numeric_limits<double>::infinity();
    return M * std::log(scale) - a2.array().log().sum() + M;
}

}  // namespace

bool is_stationary(const Eigen::VectorXd& coefficients) {
    if (coefficients.size() == 0) return true;
    return inverse_roots(coefficients).cwiseAbs().maxCoeff() < 1.0;
}

bool reflect_to_stationary(Eigen::VectorXd& coefficients) {
    if (coefficients.size() == 0) return false;
    Eigen::VectorXcd roots = inverse_roots(coefficients);
    bool reflected = false;
    for (Eigen::Index i = 0; i < roots.size(); ++i) {
        const double r = std::abs(roots[i]);
        if (r >= 1.0) {
            // Unit-modulus roots are pulled just inside the circle.
            roots[i] = r > 1.0 ? 1.0 / std::conj(roots[i]) : roots[i] * (1.0 - 1e-6);
            reflected = true;
        }
    }
    if (reflected) coefficients = from_inverse_roots(roots);
    return reflected;
}

ArCandidate fit_ar_whittle(const Eigen::VectorXd& centered, std::size_t order,
                           std::vector<std::string>* warnings) {
    if (centered.size() < 3) throw DomainError("fit_ar_whittle: series too short");
    const Periodogram pg = interior_periodogram(centered);
    const auto p = static_cast<Eigen::Index>(order);
    ArCandidate out;
    out.order = order;
    if (p == 0) {
        out.coefficients = Eigen::VectorXd(0);
        out.whittle = profiled_whittle(out.coefficients, pg, &out.innovation_variance);
        out.aic = 2.0 * out.whittle;
        return out;
    }

    // Quadratic start: minimise sum_k I_k |A_k|^2, linear in psi.
    Eigen::MatrixXd R(p, p);
    Eigen::VectorXd r(p);
    auto cos_sum = [&](Eigen::Index lag) {
        return (pg.values.array() * (static_cast<double>(lag) * pg.omega.array()).cos()).sum();
    };
    for (Eigen::Index j = 0; j < p; ++j) {
        r[j] = cos_sum(j + 1);
        for (Eigen::Index l = 0; l < p; ++l) R(j, l) = cos_sum(std::abs(j - l));
    }
    Eigen::VectorXd psi = R.fullPivLu().solve(r);
    if (!psi.allFinite()) psi = Eigen::VectorXd::Zero(p);
    if (reflect_to_stationary(psi) && warnings) {
        warnings->push_back("AR(" + std::to_string(order) +
                            "): non-stationary start reflected into the unit circle");
    }

    Eigen::VectorXd pacf = ar_to_pacf(psi);
    Eigen::VectorXd u(p);
    for (Eigen::Index k = 0; k < p; ++k) u[k] = std::atanh(std::clamp(pacf[k], -0.999, 0.999));

    auto objective = [&](const Eigen::VectorXd& x) {
        return profiled_whittle(pacf_to_ar(x.array().tanh().matrix()), pg, nullptr);
    };
    OptimizerConfig cfg;
    cfg.max_iterations = 5000;
    cfg.tolerance_f = 1e-12;
    cfg.tolerance_x = 1e-8;
    cfg.initial_step = Eigen::VectorXd::Constant(p, 0.1);
    OptimizeResult run = nelder_mead(objective, u, cfg);
    run = nelder_mead(objective, run.x, cfg);

    out.coefficients = pacf_to_ar(run.x.array().tanh().matrix());
    out.whittle = profiled_whittle(out.coefficients, pg, &out.innovation_variance);
    out.aic = 2.0 * out.whittle + 2.0 * static_cast<double>(order);
    return out;
}

ForecastOutput forecast(const Eigen::VectorXd& series, std::size_t horizons, std::size_t p_max) {
    const auto n = static_cast<std::size_t>(series.size());
    if (n < 4 * std::max<std::size_t>(p_max, 1)) {
        throw DomainError("forecast: series length " + std::to_string(n) + " must be >= 4 * p_max");
    }
    if (!series.allFinite()) throw DomainError("forecast: series has non-finite values");

    ForecastOutput out;
    out.mean = series.mean();
    const Eigen::VectorXd centered = series.array() - out.mean;

    std::size_t best = 0;
    for (std::size_t p = 0; p <= p_max; ++p) {
        out.candidates.push_back(fit_ar_whittle(centered, p, &out.warnings));
        if (out.candidates.back().aic < out.candidates[best].aic) best = p;
    }
    const ArCandidate& chosen = out.candidates[best];
    out.ar_order = chosen.order;
    out.ar_coefficients = chosen.coefficients;
    out.innovation_variance = chosen.innovation_variance;

    const auto V = static_cast<Eigen::Index>(horizons);
    const auto p = static_cast<Eigen::Index>(chosen.order);
    out.forecasts.resize(V);
    out.forecast_mse.resize(V);

    std::vector<double> path(centered.data(), centered.data() + centered.size());
    for (Eigen::Index v = 0; v < V; ++v) {
        double next = 0.0;
        for (Eigen::Index j = 0; j < p; ++j) next += chosen.coefficients[j] * path[path.size() - 1 - static_cast<std::size_t>(j)];
        path.push_back(next);
        out.forecasts[v] = next + out.mean;
    }

    // MA(infinity) weights: pi_0 = 1, pi_j = sum_i psi_i pi_{j-i}.
    std::vector<double> weights{1.0};
    double acc = 0.0;
    for (Eigen::Index v = 0; v < V; ++v) {
        if (v > 0) {
            double w = 0.0;
            for (Eigen::Index i = 1; i <= std::min(p, v); ++i) {
                w += chosen.coefficients[i - 1] * weights[static_cast<std::size_t>(v - i)];
            }
            weights.push_back(w);
        }
        acc += weights.back() * weights.back();
        out.forecast_mse[v] = out.innovation_variance * acc;
    }
    return out;
}

}  // namespace stkrig
