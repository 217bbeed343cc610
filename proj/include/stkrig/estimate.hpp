#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "stkrig/covmodel.hpp"
#include "stkrig/numerics.hpp"
#include "stkrig/spectral.hpp"

namespace stkrig {

// ---------------------------------------------------------------------------
// Distance classes N(h_l)
// ---------------------------------------------------------------------------

using SitePair = std::pair<std::size_t, std::size_t>;  // (i, j), i < j

struct DistanceBin {
    double distance = 0.0;  // mean of member distances
    std::vector<SitePair> pairs;
    double min_distance = 0.0;
    double max_distance = 0.0;
};

struct DistanceBins {
    std::vector<DistanceBin> bins;

    std::size_t size() const noexcept { return bins.size(); }
    std::size_t pair_count() const noexcept;
};

enum class BinningMode {
    Exact,     // pairs whose distances agree within a tolerance share a bin
    Quantile,  // L bins with (nearly) equal pair counts
    Auto,      // Exact when it yields at most `auto_exact_limit` bins, else Quantile
};

struct BinningSpec {
    BinningMode mode = BinningMode::Auto;
    std::size_t quantile_bins = 10;
    double tolerance = 1e-9;          // relative to the largest pair distance
    std::size_t auto_exact_limit = 30;
};

DistanceBins build_distance_bins(const Eigen::MatrixXd& locations, const BinningSpec& spec = {});

// ---------------------------------------------------------------------------
// Whittle criterion on frequency variograms
// ---------------------------------------------------------------------------

enum class CriterionKind {
    Whittle,      // sum_k [ln g + I / g] with g the model frequency variogram
    Approximate,  // first-order expansion in the coherency rho (comparison only)
};

/// Floor below which a model variogram is treated as an evaluation failure.
inline constexpr double kVariogramFloor = 1e-300;

/// Pre-averaged difference periodograms for every distance class, bound to
/// the first M interior frequencies. Evaluation is thread-count independent.
class WhittleObjective {
public:
    WhittleObjective(const SpectralPanel& spectral, DistanceBins bins, std::size_t M,
                     CriterionKind kind = CriterionKind::Whittle, unsigned threads = 1);

    /// Q_n = L^{-1} sum_l Q_{n,N(h_l)}; +inf when any model variogram
    /// underflows or is non-finite.
    double evaluate(const ModelParams& params) const;

    /// Per-bin criteria Q_{n,N(h_l)}.
    Eigen::VectorXd per_bin(const ModelParams& params) const;

    /// q_k = L^{-1} sum_l [ln g_lk + I_lk / g_lk], so that Q_n = sum_k q_k.
    Eigen::VectorXd per_frequency(const ModelParams& params) const;

    std::size_t frequencies() const noexcept { return static_cast<std::size_t>(omega_.size()); }
    const DistanceBins& bins() const noexcept { return bins_; }
    /// Mean difference periodogram of bin l (row l, M columns).
    const Eigen::MatrixXd& mean_periodograms() const noexcept { return mean_periodogram_; }
    const Eigen::VectorXd& omega() const noexcept { return omega_; }

private:
    Eigen::MatrixXd terms(const ModelParams& params) const;  // L x M

    DistanceBins bins_;
    Eigen::VectorXd omega_;
    Eigen::MatrixXd mean_periodogram_;
    CriterionKind kind_;
    unsigned threads_;
};

/// Q_n for the given params. M = 0 selects the full interior grid.
/// Throws EvaluationError when the criterion is not finite.
double whittle_criterion(const SpectralPanel& spectral, const DistanceBins& bins,
                         const ModelParams& params, std::size_t M = 0,
                         CriterionKind kind = CriterionKind::Whittle);

// ---------------------------------------------------------------------------
// Fitting
// ---------------------------------------------------------------------------

struct FitConfig {
    std::size_t p = 1;                 // cosine terms in |c(w)|^2
    std::size_t M = 0;                 // 0 -> floor((n-1)/2)
    BinningSpec binning;
    bool estimate_nugget = false;
    std::optional<double> nu_fixed;    // empty -> nu is estimated
    int d = 2;
    OptimizerConfig optimizer = default_optimizer();
    std::size_t multistart = 5;
    std::uint64_t seed = 0;
    bool remove_mean = true;
    CriterionKind criterion = CriterionKind::Whittle;
    bool compute_covariance = true;
    unsigned threads = 1;

    static OptimizerConfig default_optimizer();
};

struct RestartSummary {
    double start_value = 0.0;
    double final_value = 0.0;
    bool converged = false;
    int evaluations = 0;
};

struct FitResult {
    ModelParams params_hat;
    ParamLayout layout;
    Eigen::VectorXd theta_hat;  // unconstrained coordinates
    double criterion_value = 0.0;
    std::optional<Eigen::MatrixXd> asymptotic_covariance;  // over theta_hat coordinates
    std::string covariance_error;                          // why it is absent, if it is
    bool converged = false;
    std::size_t frequencies_used = 0;
    DistanceBins bins_used;
    std::vector<RestartSummary> restarts;
};

/// Names of the unconstrained coordinates, in order.
std::vector<std::string> coordinate_names(const ParamLayout& layout);

FitResult fit(const TimeSeriesPanel& panel, const FitConfig& config);

/// Sandwich H^{-1} V H^{-1} over the unconstrained coordinates, where H is the
/// central-difference Hessian of Q_n (step 1e-4) and V sums the outer products
/// of per-frequency score contributions. Q_n is an unnormalised sum over
/// frequencies, so this is already the covariance of theta_hat (no 1/n).
Eigen::MatrixXd asymptotic_covariance(const WhittleObjective& objective,
                                      const ModelParams& params_hat, const ParamLayout& layout);

/// Central-difference gradient of Q_n over the unconstrained coordinates.
Eigen::VectorXd criterion_gradient(const WhittleObjective& objective, const ModelParams& params,
                                   const ParamLayout& layout, double step);

}  // namespace stkrig
