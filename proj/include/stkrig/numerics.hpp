#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace stkrig {

using cdouble = std::complex<double>;

// ---------------------------------------------------------------------------
// Special functions
// ---------------------------------------------------------------------------

/// ln Gamma(x) for finite x > 0.
double log_gamma(double x);

/// Modified Bessel function of the second kind K_order(x), real order, x > 0.
/// Negative orders are folded with K_{-v} = K_v. Throws RangeError when the
/// result overflows a double.
double bessel_k(double order, double x);

// ---------------------------------------------------------------------------
// Discrete Fourier transform at the canonical frequencies 2 pi k / n.
//
// Forward:  J(w_k) = (2 pi n)^{-1/2} sum_{t=1}^{n} z_t exp(-i t w_k)
// Inverse:  z_t    = (2 pi / n)^{1/2} sum_{k=0}^{n-1} J(w_k) exp(i t w_k)
// ---------------------------------------------------------------------------

/// Twiddle table for one series length; reused across the rows of a panel.
class DftPlan {
public:
    explicit DftPlan(std::size_t n);

    std::size_t size() const noexcept { return n_; }

    /// J(w_k) for k = k_first, ..., k_first + count - 1.
    Eigen::VectorXcd forward(std::span<const double> series, std::size_t k_first,
                             std::size_t count) const;

    /// Real series from a full, Hermitian-symmetric coefficient vector of
    /// length n. Returns the imaginary residue through `imag_residue`.
    Eigen::VectorXd inverse_full(const Eigen::VectorXcd& coeffs, double* imag_residue) const;

private:
    std::size_t n_;
    std::vector<cdouble> twiddle_;  // exp(-2 pi i r / n), r = 0..n-1
};

/// J(w_k) for k = 0..floor(n/2).
Eigen::VectorXcd dft_forward(std::span<const double> series);

/// Inverts either a full grid (length n) or a half grid (length floor(n/2)+1,
/// negative frequencies filled by conjugation). Symmetry violations beyond
/// 1e-10 relative raise DomainError.
Eigen::VectorXd dft_inverse(const Eigen::VectorXcd& coeffs, std::size_t n);

// ---------------------------------------------------------------------------
// Derivative-free minimization
// ---------------------------------------------------------------------------

struct OptimizerConfig {
    int max_iterations = 2000;
    double tolerance_f = 1e-10;  // simplex spread in f, relative to 1 + |f_best|
    double tolerance_x = 1e-8;   // simplex diameter (max-norm) per coordinate
    Eigen::VectorXd initial_step;  // per-coordinate; empty -> 0.1 * max(1, |x0_i|)

    void validate() const;
};

struct OptimizeResult {
    Eigen::VectorXd x;
    double value = 0.0;
    bool converged = false;
    int iterations = 0;
    int evaluations = 0;
};

using Objective = std::function<double(const Eigen::VectorXd&)>;

/// Nelder-Mead simplex. Non-finite objective values inside the run count as
/// +inf. On convergence returns the simplex centroid when it is no worse than
/// the best vertex.
OptimizeResult nelder_mead(const Objective& objective, const Eigen::VectorXd& x0,
                           const OptimizerConfig& config);

// ---------------------------------------------------------------------------
// Hermitian positive definite systems
// ---------------------------------------------------------------------------

/// Relative jitter ladder tried after a failed plain factorization.
inline constexpr double kJitterLadder[] = {1e-12, 1e-10, 1e-8, 1e-6};

/// Cholesky factor of a Hermitian (or real symmetric) matrix, escalating a
/// diagonal jitter delta * trace(A) / m on failure.
template <typename Scalar>
class HermitianFactor {
public:
    using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

    explicit HermitianFactor(const Matrix& a);

    /// Absolute jitter added to the diagonal (0 when none was needed).
    double jitter() const noexcept { return jitter_; }
    std::size_t size() const noexcept { return static_cast<std::size_t>(factor_.rows()); }

    Matrix solve(const Matrix& rhs) const;
    /// ln det of the (possibly jittered) matrix.
    double log_det() const;
    const Matrix& lower() const noexcept { return factor_; }

private:
    Matrix jittered_;
    Matrix factor_;
    double jitter_ = 0.0;
};

template <typename Scalar>
struct HpdSolution {
    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> solution;
    double jitter = 0.0;
};

/// Solves A x = b for Hermitian positive definite A (one refinement step).
/// Throws SingularMatrixError if A stays indefinite at the top of the ladder.
template <typename Scalar>
HpdSolution<Scalar> hpd_solve(const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& a,
                              const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& rhs);

extern template class HermitianFactor<double>;
extern template class HermitianFactor<cdouble>;

}  // namespace stkrig
