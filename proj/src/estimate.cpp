#include "stkrig/estimate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>

#include <Eigen/Eigenvalues>

#include "stkrig/errors.hpp"
#include "stkrig/parallel.hpp"

namespace stkrig {

std::size_t DistanceBins::pair_count() const noexcept {
    std::size_t total = 0;
    for (const auto& b : bins) total += b.pairs.size();
    return total;
}

namespace {

struct PairDistance {
    double distance;
    SitePair pair;
};

std::vector<PairDistance> sorted_pairs(const Eigen::MatrixXd& locations) {
    std::vector<PairDistance> out;
    const auto m = static_cast<std::size_t>(locations.rows());
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = i + 1; j < m; ++j) {
            const double h = (locations.row(static_cast<Eigen::Index>(i)) -
                              locations.row(static_cast<Eigen::Index>(j)))
                                 .norm();
            out.push_back({h, {i, j}});
        }
    }
    std::stable_sort(out.begin(), out.end(), [](const PairDistance& a, const PairDistance& b) {
        return a.distance < b.distance;
    });
    return out;
}

DistanceBin make_bin(std::vector<PairDistance>::const_iterator first,
                     std::vector<PairDistance>::const_iterator last) {
    DistanceBin bin;
    double sum = 0.0;
    for (auto it = first; it != last; ++it) {
        sum += it->distance;
        bin.pairs.push_back(it->pair);
    }
    bin.distance = sum / static_cast<double>(bin.pairs.size());
    bin.min_distance = first->distance;
    bin.max_distance = (last - 1)->distance;
    return bin;
}

DistanceBins exact_bins(const std::vector<PairDistance>& pairs, double tolerance) {
    DistanceBins out;
    const double tol = tolerance * pairs.back().distance;
    auto start = pairs.begin();
    for (auto it = pairs.begin(); it != pairs.end(); ++it) {
        if (it->distance - start->distance > tol) {
            out.bins.push_back(make_bin(start, it));
            start = it;
        }
    }
    out.bins.push_back(make_bin(start, pairs.end()));
    return out;
}

DistanceBins quantile_bins(const std::vector<PairDistance>& pairs, std::size_t L) {
    if (L < 1) throw DomainError("build_distance_bins: quantile mode needs L >= 1");
    const std::size_t total = pairs.size();
    L = std::min(L, total);
    DistanceBins out;
    std::size_t begin = 0;
    for (std::size_t l = 1; l <= L; ++l) {
        const auto end = static_cast<std::size_t>(
            std::lround(static_cast<double>(l) * static_cast<double>(total) / static_cast<double>(L)));
        if (end > begin) {
            out.bins.push_back(make_bin(pairs.begin() + static_cast<std::ptrdiff_t>(begin),
                                        pairs.begin() + static_cast<std::ptrdiff_t>(end)));
        }
        begin = end;
    }
    return out;
}

}  // namespace

DistanceBins build_distance_bins(const Eigen::MatrixXd& locations, const BinningSpec& spec) {
    if (locations.rows() < 2) throw DomainError("build_distance_bins: need at least two sites");
    if (!(spec.tolerance >= 0.0)) throw DomainError("build_distance_bins: tolerance must be >= 0");
    const auto pairs = sorted_pairs(locations);
    switch (spec.mode) {
        case BinningMode::Exact:
            return exact_bins(pairs, spec.tolerance);
        case BinningMode::Quantile:
            return quantile_bins(pairs, spec.quantile_bins);
        case BinningMode::Auto: {
            auto exact = exact_bins(pairs, spec.tolerance);
            if (exact.size() <= spec.auto_exact_limit) return exact;
            return quantile_bins(pairs, spec.quantile_bins);
        }
    }
    throw DomainError("build_distance_bins: unknown mode");
}

// ---------------------------------------------------------------------------

WhittleObjective::WhittleObjective(const SpectralPanel& spectral, DistanceBins bins,
                                   std::size_t M, CriterionKind kind, unsigned threads)
    : bins_(std::move(bins)), kind_(kind), threads_(threads) {
    const std::size_t grid = spectral.grid_size();
    if (M == 0) M = grid;
    if (M > grid) {
        throw DomainError("whittle_criterion: M=" + std::to_string(M) + " exceeds grid size " +
                          std::to_string(grid));
    }
    if (M == 0) throw DomainError("whittle_criterion: empty frequency grid (n too small)");
    if (bins_.bins.empty()) throw DomainError("whittle_criterion: no distance bins");
    omega_ = spectral.frequencies.head(static_cast<Eigen::Index>(M));
    const auto L = static_cast<Eigen::Index>(bins_.size());
    mean_periodogram_ = Eigen::MatrixXd::Zero(L, static_cast<Eigen::Index>(M));
    for (Eigen::Index l = 0; l < L; ++l) {
        const auto& bin = bins_.bins[static_cast<std::size_t>(l)];
        if (bin.pairs.empty()) throw DomainError("whittle_criterion: empty distance bin");
        if (!(bin.distance > 0.0)) throw DomainError("whittle_criterion: bin distance must be > 0");
        for (const auto& [i, j] : bin.pairs) {
            mean_periodogram_.row(l) +=
                difference_periodogram(spectral, i, j).head(static_cast<Eigen::Index>(M)).transpose();
        }
        mean_periodogram_.row(l) /= static_cast<double>(bin.pairs.size());
    }
}

Eigen::MatrixXd WhittleObjective::terms(const ModelParams& params) const {
    params.validate();
    const auto L = static_cast<std::size_t>(bins_.size());
    const auto M = static_cast<Eigen::Index>(omega_.size());
    Eigen::MatrixXd out(static_cast<Eigen::Index>(L), M);
    const double nugget_density = params.nugget / (2.0 * std::numbers::pi);
    parallel_for(L, threads_, [&](std::size_t l) {
        const double h = bins_.bins[l].distance;
        const auto row = static_cast<Eigen::Index>(l);
        for (Eigen::Index k = 0; k < M; ++k) {
            const double omega = omega_[k];
            const double periodogram = mean_periodogram_(row, k);
            double term;
            if (kind_ == CriterionKind::Whittle) {
                const double g = variogram_model(h, omega, params);
                term = (std::isfinite(g) && g >= kVariogramFloor)
                           ? std::log(g) + periodogram / g
                           : std::numeric_limits<double>::infinity();
            } else {
                // First-order expansion of ln(1 - rho) and 1 / (1 - rho).
                const double c0 = cov_zero(omega, params) + nugget_density;
                const double rho = cov_freq(h, omega, params) / c0;
                term = std::log(2.0) + std::log(c0) - rho + periodogram / (2.0 * c0) * (1.0 + rho);
            }
            out(row, k) = std::isfinite(term) ? term : std::numeric_limits<double>::infinity();
        }
    });
    return out;
}

Eigen::VectorXd WhittleObjective::per_bin(const ModelParams& params) const {
    const Eigen::MatrixXd t = terms(params);
    Eigen::VectorXd out(t.rows());
    for (Eigen::Index l = 0; l < t.rows(); ++l) {
        double acc = 0.0;
        for (Eigen::Index k = 0; k < t.cols(); ++k) acc += t(l, k);
        out[l] = acc;
    }
    return out;
}

Eigen::VectorXd WhittleObjective::per_frequency(const ModelParams& params) const {
    const Eigen::MatrixXd t = terms(params);
    Eigen::VectorXd out(t.cols());
    for (Eigen::Index k = 0; k < t.cols(); ++k) {
        double acc = 0.0;
        for (Eigen::Index l = 0; l < t.rows(); ++l) acc += t(l, k);
        out[k] = acc / static_cast<double>(t.rows());
    }
    return out;
}

double WhittleObjective::evaluate(const ModelParams& params) const {
    const Eigen::VectorXd bins = per_bin(params);
    double acc = 0.0;
    for (Eigen::Index l = 0; l < bins.size(); ++l) acc += bins[l];
    const double q = acc / static_cast<double>(bins.size());
    return std::isfinite(q) ? q : std::numeric_limits<double>::infinity();
}

double whittle_criterion(const SpectralPanel& spectral, const DistanceBins& bins,
                         const ModelParams& params, std::size_t M, CriterionKind kind) {
    params.validate();
    const WhittleObjective objective(spectral, bins, M, kind);
    double q;
    try {
        q = objective.evaluate(params);
    } catch (const std::domain_error& e) {
        // Valid parameters whose |c(w)| or Bessel terms leave double range.
        throw EvaluationError(std::string("whittle_criterion: ") + e.what());
    } catch (const std::range_error& e) {
        throw EvaluationError(std::string("whittle_criterion: ") + e.what());
    }
    if (!std::isfinite(q)) {
        throw EvaluationError("whittle_criterion: criterion is not finite (variogram underflow)");
    }
    return q;
}

// ---------------------------------------------------------------------------

OptimizerConfig FitConfig::default_optimizer() {
    OptimizerConfig c;
    c.max_iterations = 4000;
    c.tolerance_f = 1e-10;
    c.tolerance_x = 1e-6;
    return c;
}

std::vector<std::string> coordinate_names(const ParamLayout& layout) {
    std::vector<std::string> names{"log_sigma_e2"};
    if (layout.estimate_nu) names.emplace_back("log_nu_excess");
    for (std::size_t b = 0; b <= layout.p; ++b) names.push_back("b" + std::to_string(b));
    if (layout.estimate_nugget) names.emplace_back("log_nugget");
    return names;
}

namespace {

double objective_at(const WhittleObjective& objective, const Eigen::VectorXd& theta,
                    const ParamLayout& layout) {
    try {
        return objective.evaluate(from_unconstrained(theta, layout));
    } catch (const std::exception&) {
        return std::numeric_limits<double>::infinity();
    }
}

}  // namespace

Eigen::VectorXd criterion_gradient(const WhittleObjective& objective, const ModelParams& params,
                                   const ParamLayout& layout, double step) {
    const Eigen::VectorXd theta = to_unconstrained(params, layout);
    Eigen::VectorXd grad(theta.size());
    for (Eigen::Index i = 0; i < theta.size(); ++i) {
        Eigen::VectorXd up = theta, down = theta;
        up[i] += step;
        down[i] -= step;
        grad[i] = (objective_at(objective, up, layout) - objective_at(objective, down, layout)) /
                  (2.0 * step);
    }
    return grad;
}

Eigen::MatrixXd asymptotic_covariance(const WhittleObjective& objective,
                                      const ModelParams& params_hat, const ParamLayout& layout) {
    constexpr double h = 1e-4;
    const Eigen::VectorXd theta = to_unconstrained(params_hat, layout);
    const Eigen::Index p = theta.size();
    auto q = [&](const Eigen::VectorXd& t) { return objective_at(objective, t, layout); };

    const double q0 = q(theta);
    Eigen::MatrixXd hessian(p, p);
    for (Eigen::Index i = 0; i < p; ++i) {
        Eigen::VectorXd up = theta, down = theta;
        up[i] += h;
        down[i] -= h;
        hessian(i, i) = (q(up) - 2.0 * q0 + q(down)) / (h * h);
        for (Eigen::Index j = 0; j < i; ++j) {
            Eigen::VectorXd pp = theta, pm = theta, mp = theta, mm = theta;
            pp[i] += h; pp[j] += h;
            pm[i] += h; pm[j] -= h;
            mp[i] -= h; mp[j] += h;
            mm[i] -= h; mm[j] -= h;
            hessian(i, j) = hessian(j, i) = (q(pp) - q(pm) - q(mp) + q(mm)) / (4.0 * h * h);
        }
    }
    if (!hessian.allFinite()) {
        throw SingularHessianError("asymptotic_covariance: Hessian is not finite", {});
    }
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(hessian);
    const Eigen::VectorXd ev = eig.eigenvalues();
    if (!(ev.minCoeff() > 1e-10 * ev.cwiseAbs().maxCoeff())) {
        throw SingularHessianError("asymptotic_covariance: Hessian is singular or indefinite",
                                   std::vector<double>(ev.data(), ev.data() + ev.size()));
    }

    // Per-frequency score contributions by central differences.
    const auto M = static_cast<Eigen::Index>(objective.frequencies());
    Eigen::MatrixXd scores(M, p);
    for (Eigen::Index i = 0; i < p; ++i) {
        Eigen::VectorXd up = theta, down = theta;
        up[i] += h;
        down[i] -= h;
        scores.col(i) = (objective.per_frequency(from_unconstrained(up, layout)) -
                         objective.per_frequency(from_unconstrained(down, layout))) /
                        (2.0 * h);
    }
    const Eigen::MatrixXd v = scores.transpose() * scores;
    const Eigen::MatrixXd h_inv =
        eig.eigenvectors() * ev.cwiseInverse().asDiagonal() * eig.eigenvectors().transpose();
    Eigen::MatrixXd cov = h_inv * v * h_inv;
    return 0.5 * (cov + cov.transpose());
}

FitResult fit(const TimeSeriesPanel& panel, const FitConfig& config) {
    if (panel.sites() < 2) throw DomainError("fit: need at least two sites");
    if (panel.length() < 16) throw DomainError("fit: need n >= 16 time points");
    if (static_cast<int>(panel.dimension()) != config.d) {
        throw DomainError("fit: location dimension does not match config d");
    }
    config.optimizer.validate();

    ParamLayout layout;
    layout.p = config.p;
    layout.d = config.d;
    layout.estimate_nu = !config.nu_fixed.has_value();
    layout.fixed_nu = config.nu_fixed.value_or(1.0);
    layout.estimate_nugget = config.estimate_nugget;
    if (config.nu_fixed && !(*config.nu_fixed > 0.25 * config.d)) {
        throw DomainError("fit: fixed nu must exceed d/4");
    }

    const SpectralPanel spectral = dft_panel(panel, config.remove_mean, config.threads);
    DistanceBins bins = build_distance_bins(panel.locations(), config.binning);
    const WhittleObjective objective(spectral, bins, config.M, config.criterion, config.threads);

    double pooled = 0.0;
    for (Eigen::Index i = 0; i < spectral.dft.rows(); ++i) {
        pooled += spectral.dft.row(i).head(static_cast<Eigen::Index>(objective.frequencies())).cwiseAbs2().mean();
    }
    pooled /= static_cast<double>(spectral.dft.rows());
    if (!(pooled > 0.0)) throw EstimationError("fit: all periodograms are zero");
    const double variance = panel.observations().array().square().mean();

    std::mt19937_64 rng(config.seed);
    std::normal_distribution<double> coeff_draw(0.0, 0.5);

    auto start_point = [&](std::size_t restart) {
        ModelParams start;
        start.d = config.d;
        start.nu = layout.estimate_nu ? 0.25 * config.d + 1.0 : layout.fixed_nu;
        start.c_coeffs = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(config.p + 1));
        if (restart > 0) {
            for (Eigen::Index b = 0; b < start.c_coeffs.size(); ++b) start.c_coeffs[b] = coeff_draw(rng);
        }
        start.nugget = config.estimate_nugget ? std::max(1e-6, 0.1 * variance) : 0.0;
        start.sigma_e2 = 1.0;
        // Scale sigma_e2 so the model's mean spectrum matches the pooled periodogram.
        double mean_spectrum = 0.0;
        for (Eigen::Index k = 0; k < objective.omega().size(); ++k) {
            mean_spectrum += cov_zero(objective.omega()[k], start);
        }
        mean_spectrum /= static_cast<double>(objective.omega().size());
        start.sigma_e2 = pooled / mean_spectrum;
        return to_unconstrained(start, layout);
    };

    OptimizerConfig opt = config.optimizer;
    if (opt.initial_step.size() == 0) {
        opt.initial_step = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(layout.dimension()), 0.5);
    }
    auto fn = [&](const Eigen::VectorXd& theta) { return objective_at(objective, theta, layout); };

    FitResult result;
    result.layout = layout;
    result.frequencies_used = objective.frequencies();
    bool have_best = false;
    OptimizeResult best;
    for (std::size_t r = 0; r < std::max<std::size_t>(1, config.multistart); ++r) {
        const Eigen::VectorXd theta0 = start_point(r);
        RestartSummary summary;
        summary.start_value = fn(theta0);
        if (!std::isfinite(summary.start_value)) {
            summary.final_value = summary.start_value;
            result.restarts.push_back(summary);
            continue;
        }
        OptimizeResult run = nelder_mead(fn, theta0, opt);
        // Restart once from the optimum to escape a collapsed simplex.
        OptimizeResult polish = nelder_mead(fn, run.x, opt);
        polish.evaluations += run.evaluations;
        summary.final_value = polish.value;
        summary.converged = polish.converged;
        summary.evaluations = polish.evaluations;
        result.restarts.push_back(summary);
        if (std::isfinite(polish.value) && (!have_best || polish.value < best.value)) {
            best = polish;
            have_best = true;
        }
    }
    if (!have_best) throw EstimationError("fit: no restart produced a finite criterion");

    result.theta_hat = best.x;
    result.params_hat = from_unconstrained(best.x, layout);
    result.criterion_value = best.value;
    result.converged = best.converged;
    if (config.compute_covariance) {
        try {
            result.asymptotic_covariance = asymptotic_covariance(objective, result.params_hat, layout);
        } catch (const SingularHessianError& e) {
            result.covariance_error = e.what();
        }
    }
    result.bins_used = std::move(bins);
    return result;
}

}  // namespace stkrig
