#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "stkrig/numerics.hpp"

namespace stkrig {

/// m sites in R^d with an m x n block of real observations, row i = Z(s_i, t).
class TimeSeriesPanel {
public:
    TimeSeriesPanel() = default;
    /// Validates: m >= 1, n >= 2, distinct locations, finite observations.
    /// Empty `site_ids` are filled with "s1".."sm".
    TimeSeriesPanel(Eigen::MatrixXd locations, Eigen::MatrixXd observations,
                    std::vector<std::string> site_ids = {});

    std::size_t sites() const noexcept { return static_cast<std::size_t>(observations_.rows()); }
    std::size_t length() const noexcept { return static_cast<std::size_t>(observations_.cols()); }
    std::size_t dimension() const noexcept { return static_cast<std::size_t>(locations_.cols()); }

    const Eigen::MatrixXd& locations() const noexcept { return locations_; }
    const Eigen::MatrixXd& observations() const noexcept { return observations_; }
    const std::vector<std::string>& site_ids() const noexcept { return site_ids_; }

    /// Panel with the first `n` time points of every site.
    TimeSeriesPanel truncated(std::size_t n) const;
    /// Panel restricted to the given rows, in that order.
    TimeSeriesPanel subset(const std::vector<std::size_t>& rows) const;

private:
    Eigen::MatrixXd locations_;
    Eigen::MatrixXd observations_;
    std::vector<std::string> site_ids_;
};

/// DFT of every site on the interior grid w_k = 2 pi k / n, k = 1..M.
struct SpectralPanel {
    Eigen::MatrixXcd dft;         // m x M
    Eigen::VectorXd frequencies;  // M, strictly increasing in (0, pi)
    std::size_t n = 0;
    bool mean_removed = false;
    Eigen::VectorXd site_means;   // per-site sample means (always recorded)
    Eigen::VectorXcd nyquist;     // J(pi) per site for even n, empty otherwise

    std::size_t sites() const noexcept { return static_cast<std::size_t>(dft.rows()); }
    std::size_t grid_size() const noexcept { return static_cast<std::size_t>(dft.cols()); }
};

/// w_k = 2 pi k / n for k = 1..floor((n-1)/2); w = 0 and w = pi are excluded.
Eigen::VectorXd fourier_frequencies(std::size_t n);

SpectralPanel dft_panel(const TimeSeriesPanel& panel, bool remove_mean, unsigned threads = 1);

/// |J_i(w_k)|^2.
Eigen::VectorXd periodogram(const SpectralPanel& spectral, std::size_t site);

/// J_i(w_k) conj(J_j(w_k)).
Eigen::VectorXcd cross_periodogram(const SpectralPanel& spectral, std::size_t i, std::size_t j);

/// |J_i(w_k) - J_j(w_k)|^2, the periodogram of Z(s_i, t) - Z(s_j, t). Requires i != j.
Eigen::VectorXd difference_periodogram(const SpectralPanel& spectral, std::size_t i,
                                       std::size_t j);

// ---------------------------------------------------------------------------
// Block partition of the frequencies 1..(n-1)/2 into M1 blocks of 2K+1
// neighbours, centred at j_l = (l-1)(2K+1) + (K+1).
// ---------------------------------------------------------------------------

enum class PartitionPolicy {
    Strict,    // (2K+1) M1 must equal (n-1)/2 exactly
    Truncate,  // M1 = floor((n-1) / (2(2K+1))); trailing frequencies are unused
};

struct FrequencyPartition {
    std::size_t K = 0;
    std::size_t M1 = 0;
    std::vector<std::size_t> centers;  // j_l, l = 1..M1
    std::size_t unused = 0;            // frequencies left over under Truncate
};

/// Requires odd n and K >= 1. Strict indivisibility raises DomainError listing
/// every admissible K for this n.
FrequencyPartition partition_frequencies(std::size_t n, std::size_t K,
                                         PartitionPolicy policy = PartitionPolicy::Strict);

/// Every K >= 1 with (2K+1) dividing (n-1)/2.
std::vector<std::size_t> admissible_half_windows(std::size_t n);

/// f_ij(w_l) = (2K+1)^{-1} sum_{j'=-K}^{K} I_ij(w_l + 2 pi j'/n) at the block centres.
Eigen::VectorXcd smoothed_cross_spectrum(const SpectralPanel& spectral, std::size_t i,
                                         std::size_t j, const FrequencyPartition& partition);
Eigen::VectorXcd smoothed_cross_spectrum(const SpectralPanel& spectral, std::size_t i,
                                         std::size_t j, std::size_t K,
                                         PartitionPolicy policy = PartitionPolicy::Strict);

}  // namespace stkrig
