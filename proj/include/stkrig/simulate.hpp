#pragma once

#include <cstddef>
#include <cstdint>

#include <Eigen/Core>

#include "stkrig/covmodel.hpp"
#include "stkrig/spectral.hpp"

namespace stkrig {

struct SimulationSpec {
    Eigen::MatrixXd locations;  // m x d
    std::size_t n = 0;
    ModelParams params;
    std::uint64_t seed = 0;
    // Adds i.i.d. N(0, params.nugget) measurement error to every observation.
    bool include_measurement_error = false;
    unsigned threads = 1;
};

/// Frequencies whose covariance needed diagonal jitter to factor.
struct SimulationReport {
    std::size_t jittered_frequencies = 0;
    double max_jitter = 0.0;
};

/// Gaussian panel whose DFT vector at every canonical frequency w_k has
/// covariance F_m(w_k) = [C(|s_i - s_j|, w_k)]. Each frequency draws from its
/// own seeded stream, so output is identical for any thread count.
TimeSeriesPanel simulate_panel(const SimulationSpec& spec, SimulationReport* report = nullptr);

/// m independent N(0, sigma2) white-noise series at sites (i, 0), i = 0..m-1.
TimeSeriesPanel simulate_white_panel(std::size_t m, std::size_t n, double sigma2,
                                     std::uint64_t seed);

/// Covariance matrix [C(|s_i - s_j|, w)] for the given sites (no nugget).
Eigen::MatrixXd frequency_covariance(const Eigen::MatrixXd& locations, double omega,
                                     const ModelParams& params);

}  // namespace stkrig
