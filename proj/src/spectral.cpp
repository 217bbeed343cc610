#include "stkrig/spectral.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <string>

#include "stkrig/errors.hpp"
#include "stkrig/parallel.hpp"

namespace stkrig {

TimeSeriesPanel::TimeSeriesPanel(Eigen::MatrixXd locations, Eigen::MatrixXd observations,
                                 std::vector<std::string> site_ids)
    : locations_(std::move(locations)),
      observations_(std::move(observations)),
      site_ids_(std::move(site_ids)) {
    const auto m = observations_.rows();
    if (m < 1) throw DomainError("TimeSeriesPanel: need at least one site");
    if (observations_.cols() < 2) throw DomainError("TimeSeriesPanel: need n >= 2 time points");
    if (locations_.rows() != m) {
        throw DomainError("TimeSeriesPanel: " + std::to_string(locations_.rows()) +
                          " locations for " + std::to_string(m) + " series");
    }
    if (locations_.cols() < 1) throw DomainError("TimeSeriesPanel: locations need d >= 1");
    if (!locations_.allFinite()) throw DomainError("TimeSeriesPanel: non-finite location");
    for (Eigen::Index i = 0; i < m; ++i) {
        for (Eigen::Index t = 0; t < observations_.cols(); ++t) {
            if (!std::isfinite(observations_(i, t))) {
                throw DomainError("TimeSeriesPanel: non-finite observation at site " +
                                  std::to_string(i) + ", t=" + std::to_string(t + 1));
            }
        }
        for (Eigen::Index j = 0; j < i; ++j) {
            if ((locations_.row(i) - locations_.row(j)).squaredNorm() == 0.0) {
                throw DomainError("TimeSeriesPanel: duplicate location for sites " +
                                  std::to_string(j) + " and " + std::to_string(i));
            }
        }
    }
    if (site_ids_.empty()) {
        for (Eigen::Index i = 0; i < m; ++i) site_ids_.push_back("s" + std::to_string(i + 1));
    } else if (static_cast<Eigen::Index>(site_ids_.size()) != m) {
        throw DomainError("TimeSeriesPanel: site_ids size does not match site count");
    }
}

TimeSeriesPanel TimeSeriesPanel::truncated(std::size_t n) const {
    if (n > length()) throw DomainError("TimeSeriesPanel::truncated: n exceeds series length");
    return {locations_, observations_.leftCols(static_cast<Eigen::Index>(n)), site_ids_};
}

TimeSeriesPanel TimeSeriesPanel::subset(const std::vector<std::size_t>& rows) const {
    Eigen::MatrixXd loc(static_cast<Eigen::Index>(rows.size()), locations_.cols());
    Eigen::MatrixXd obs(static_cast<Eigen::Index>(rows.size()), observations_.cols());
    std::vector<std::string> ids;
    for (std::size_t r = 0; r < rows.size(); ++r) {
        if (rows[r] >= sites()) throw DomainError("TimeSeriesPanel::subset: bad row index");
        loc.row(static_cast<Eigen::Index>(r)) = locations_.row(static_cast<Eigen::Index>(rows[r]));
        obs.row(static_cast<Eigen::Index>(r)) =
            observations_.row(static_cast<Eigen::Index>(rows[r]));
        ids.push_back(site_ids_[rows[r]]);
    }
    return {std::move(loc), std::move(obs), std::move(ids)};
}

Eigen::VectorXd fourier_frequencies(std::size_t n) {
    if (n < 2) throw DomainError("fourier_frequencies: n must be >= 2");
    const std::size_t count = (n - 1) / 2;
    Eigen::VectorXd w(static_cast<Eigen::Index>(count));
    for (std::size_t k = 1; k <= count; ++k) {
        w[static_cast<Eigen::Index>(k - 1)] =
            2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n);
    }
    return w;
}

SpectralPanel dft_panel(const TimeSeriesPanel& panel, bool remove_mean, unsigned threads) {
    const std::size_t m = panel.sites();
    const std::size_t n = panel.length();
    const DftPlan plan(n);

    SpectralPanel out;
    out.n = n;
    out.mean_removed = remove_mean;
    out.frequencies = fourier_frequencies(n);
    const std::size_t grid = static_cast<std::size_t>(out.frequencies.size());
    out.dft.resize(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(grid));
    out.site_means = panel.observations().rowwise().mean();
    const bool even = n % 2 == 0;
    if (even) out.nyquist.resize(static_cast<Eigen::Index>(m));

    parallel_for(m, threads, [&](std::size_t i) {
        const auto row = static_cast<Eigen::Index>(i);
        Eigen::VectorXd series = panel.observations().row(row).transpose();
        if (remove_mean) series.array() -= out.site_means[row];
        const std::span<const double> view(series.data(), n);
        if (grid > 0) out.dft.row(row) = plan.forward(view, 1, grid).transpose();
        if (even) out.nyquist[row] = plan.forward(view, n / 2, 1)[0];
    });
    return out;
}

namespace {

void check_site(const SpectralPanel& spectral, std::size_t i, const char* who) {
    if (i >= spectral.sites()) {
        throw DomainError(std::string(who) + ": site index " + std::to_string(i) +
                          " out of range (m=" + std::to_string(spectral.sites()) + ")");
    }
}

}  // namespace

Eigen::VectorXd periodogram(const SpectralPanel& spectral, std::size_t site) {
    check_site(spectral, site, "periodogram");
    return spectral.dft.row(static_cast<Eigen::Index>(site)).cwiseAbs2().transpose();
}

Eigen::VectorXcd cross_periodogram(const SpectralPanel& spectral, std::size_t i, std::size_t j) {
    check_site(spectral, i, "cross_periodogram");
    check_site(spectral, j, "cross_periodogram");
    const auto a = spectral.dft.row(static_cast<Eigen::Index>(i));
    const auto b = spectral.dft.row(static_cast<Eigen::Index>(j));
    return a.cwiseProduct(b.conjugate()).transpose();
}

Eigen::VectorXd difference_periodogram(const SpectralPanel& spectral, std::size_t i,
                                       std::size_t j) {
    check_site(spectral, i, "difference_periodogram");
    check_site(spectral, j, "difference_periodogram");
    if (i == j) throw DomainError("difference_periodogram: sites must be distinct");
    const auto a = spectral.dft.row(static_cast<Eigen::Index>(i));
    const auto b = spectral.dft.row(static_cast<Eigen::Index>(j));
    return (a - b).cwiseAbs2().transpose();
}

std::vector<std::size_t> admissible_half_windows(std::size_t n) {
    std::vector<std::size_t> out;
    if (n < 3 || n % 2 == 0) return out;
    const std::size_t half = (n - 1) / 2;
    for (std::size_t K = 1; 2 * K + 1 <= half; ++K) {
        if (half % (2 * K + 1) == 0) out.push_back(K);
    }
    return out;
}

FrequencyPartition partition_frequencies(std::size_t n, std::size_t K, PartitionPolicy policy) {
    if (n % 2 == 0) {
        throw DomainError("partition_frequencies: n must be odd (got " + std::to_string(n) +
                          "); drop the last observation first");
    }
    if (K < 1) throw DomainError("partition_frequencies: K must be >= 1");
    const std::size_t half = (n - 1) / 2;
    const std::size_t width = 2 * K + 1;
    FrequencyPartition part;
    part.K = K;
    part.M1 = half / width;
    part.unused = half - part.M1 * width;
    if (part.M1 == 0 || (policy == PartitionPolicy::Strict && part.unused != 0)) {
        std::ostringstream msg;
        msg << "partition_frequencies: no block partition with K=" << K << " for n=" << n
            << " ((2K+1) M1 = " << half << " required); admissible K: ";
        const auto valid = admissible_half_windows(n);
        if (valid.empty()) msg << "none";
        for (std::size_t v = 0; v < valid.size(); ++v) msg << (v ? ", " : "") << valid[v];
        throw DomainError(msg.str());
    }
    for (std::size_t l = 1; l <= part.M1; ++l) part.centers.push_back((l - 1) * width + K + 1);
    return part;
}

Eigen::VectorXcd smoothed_cross_spectrum(const SpectralPanel& spectral, std::size_t i,
                                         std::size_t j, const FrequencyPartition& partition) {
    check_site(spectral, i, "smoothed_cross_spectrum");
    check_site(spectral, j, "smoothed_cross_spectrum");
    if (spectral.n % 2 == 0) throw DomainError("smoothed_cross_spectrum: n must be odd");
    const auto grid = spectral.grid_size();
    Eigen::VectorXcd out(static_cast<Eigen::Index>(partition.M1));
    const auto a = spectral.dft.row(static_cast<Eigen::Index>(i));
    const auto b = spectral.dft.row(static_cast<Eigen::Index>(j));
    const double weight = 1.0 / static_cast<double>(2 * partition.K + 1);
    for (std::size_t l = 0; l < partition.M1; ++l) {
        const std::size_t center = partition.centers[l];
        if (center + partition.K > grid) {
            throw DomainError("smoothed_cross_spectrum: partition exceeds the frequency grid");
        }
        cdouble acc(0.0, 0.0);
        // Grid column c holds frequency index c + 1.
        for (std::size_t k = center - partition.K; k <= center + partition.K; ++k) {
            const auto c = static_cast<Eigen::Index>(k - 1);
            acc += a[c] * std::conj(b[c]);
        }
        out[static_cast<Eigen::Index>(l)] = acc * weight;
    }
    return out;
}

Eigen::VectorXcd smoothed_cross_spectrum(const SpectralPanel& spectral, std::size_t i,
                                         std::size_t j, std::size_t K, PartitionPolicy policy) {
    return smoothed_cross_spectrum(spectral, i, j, partition_frequencies(spectral.n, K, policy));
}

}  // namespace stkrig
