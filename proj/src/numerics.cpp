#include "stkrig/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <stdexcept>
#include <string>

#include <Eigen/Cholesky>
#include <boost/math/special_functions/bessel.hpp>

#include "stkrig/errors.hpp"

namespace stkrig {

double log_gamma(double x) {
    if (!std::isfinite(x) || x <= 0.0) {
        throw DomainError("log_gamma: argument must be finite and > 0, got " + std::to_string(x));
    }
    return std::lgamma(x);
}

double bessel_k(double order, double x) {
    if (!std::isfinite(order)) throw DomainError("bessel_k: order must be finite");
    if (!std::isfinite(x) || x <= 0.0) {
        throw DomainError("bessel_k: argument must be finite and > 0, got " + std::to_string(x));
    }
    const double v = std::fabs(order);
    double value;
    try {
        value = boost::math::cyl_bessel_k(v, x);
    } catch (const std::overflow_error&) {
        throw RangeError("bessel_k: K_" + std::to_string(v) + "(" + std::to_string(x) +
                         ") overflows");
    }
    if (!std::isfinite(value)) {
        throw RangeError("bessel_k: K_" + std::to_string(v) + "(" + std::to_string(x) +
                         ") overflows");
    }
    return value;
}

// ---------------------------------------------------------------------------

DftPlan::DftPlan(std::size_t n) : n_(n), twiddle_(n) {
    if (n < 2) throw DomainError("DFT: series length must be >= 2, got " + std::to_string(n));
    const double step = -2.0 * std::numbers::pi / static_cast<double>(n);
    for (std::size_t r = 0; r < n; ++r) {
        twiddle_[r] = std::polar(1.0, step * static_cast<double>(r));
    }
}

Eigen::VectorXcd DftPlan::forward(std::span<const double> series, std::size_t k_first,
                                  std::size_t count) const {
    if (series.size() != n_) {
        throw DomainError("DFT: series length " + std::to_string(series.size()) +
                          " does not match plan length " + std::to_string(n_));
    }
    const double scale = 1.0 / std::sqrt(2.0 * std::numbers::pi * static_cast<double>(n_));
    Eigen::VectorXcd out(static_cast<Eigen::Index>(count));
    for (std::size_t c = 0; c < count; ++c) {
        const std::size_t k = (k_first + c) % n_;
        double re = 0.0;
        double im = 0.0;
        // t runs 1..n; phase index (t * k) mod n advanced incrementally.
        std::size_t r = k;
        for (std::size_t t = 0; t < n_; ++t) {
            const cdouble w = twiddle_[r];
            re += series[t] * w.real();
            im += series[t] * w.imag();
            r += k;
            if (r >= n_) r -= n_;
        }
        out[static_cast<Eigen::Index>(c)] = cdouble(re * scale, im * scale);
    }
    return out;
}

Eigen::VectorXd DftPlan::inverse_full(const Eigen::VectorXcd& coeffs, double* imag_residue) const {
    if (static_cast<std::size_t>(coeffs.size()) != n_) {
        throw DomainError("inverse DFT: expected " + std::to_string(n_) + " coefficients");
    }
    const double scale = std::sqrt(2.0 * std::numbers::pi / static_cast<double>(n_));
    Eigen::VectorXd out(static_cast<Eigen::Index>(n_));
    double residue = 0.0;
    for (std::size_t t = 1; t <= n_; ++t) {
        cdouble acc(0.0, 0.0);
        const std::size_t stride = t % n_;
        std::size_t r = 0;
        for (std::size_t k = 0; k < n_; ++k) {
            // exp(+i t w_k) = conj(twiddle[(t k) mod n])
            acc += coeffs[static_cast<Eigen::Index>(k)] * std::conj(twiddle_[r]);
            r += stride;
            if (r >= n_) r -= n_;
        }
        out[static_cast<Eigen::Index>(t - 1)] = acc.real() * scale;
        residue = std::max(residue, std::fabs(acc.imag() * scale));
    }
    if (imag_residue) *imag_residue = residue;
    return out;
}

Eigen::VectorXcd dft_forward(std::span<const double> series) {
    if (series.empty()) throw DomainError("dft_forward: empty series");
    const DftPlan plan(series.size());
    return plan.forward(series, 0, series.size() / 2 + 1);
}

Eigen::VectorXd dft_inverse(const Eigen::VectorXcd& coeffs, std::size_t n) {
    if (n < 2) throw DomainError("dft_inverse: n must be >= 2");
    const auto len = static_cast<std::size_t>(coeffs.size());
    const std::size_t half = n / 2 + 1;
    const double mag = coeffs.size() ? coeffs.cwiseAbs().maxCoeff() : 0.0;
    const double tol = 1e-10 * std::max(1.0, mag);

    Eigen::VectorXcd full(static_cast<Eigen::Index>(n));
    if (len == n) {
        for (std::size_t k = 0; k < n; ++k) {
            const std::size_t mirror = (n - k) % n;
            if (std::abs(coeffs[k] - std::conj(coeffs[mirror])) > tol) {
                throw DomainError("dft_inverse: coefficients violate Hermitian symmetry at k=" +
                                  std::to_string(k));
            }
        }
        full = coeffs;
    } else if (len == half) {
        if (std::fabs(coeffs[0].imag()) > tol) {
            throw DomainError("dft_inverse: zero-frequency coefficient must be real");
        }
        if (n % 2 == 0 && std::fabs(coeffs[static_cast<Eigen::Index>(n / 2)].imag()) > tol) {
            throw DomainError("dft_inverse: Nyquist coefficient must be real for even n");
        }
        for (std::size_t k = 0; k < half; ++k) full[k] = coeffs[k];
        for (std::size_t k = half; k < n; ++k) full[k] = std::conj(coeffs[n - k]);
    } else {
        throw DomainError("dft_inverse: expected " + std::to_string(n) + " or " +
                          std::to_string(half) + " coefficients, got " + std::to_string(len));
    }
    const DftPlan plan(n);
    double residue = 0.0;
    return plan.inverse_full(full, &residue);
}

// ---------------------------------------------------------------------------

void OptimizerConfig::validate() const {
    if (max_iterations < 1) throw DomainError("OptimizerConfig: max_iterations must be >= 1");
    if (!(tolerance_f > 0.0) || !(tolerance_x > 0.0)) {
        throw DomainError("OptimizerConfig: tolerances must be > 0");
    }
}

OptimizeResult nelder_mead(const Objective& objective, const Eigen::VectorXd& x0,
                           const OptimizerConfig& config) {
    config.validate();
    const Eigen::Index p = x0.size();
    if (p < 1) throw DomainError("nelder_mead: empty parameter vector");
    if (config.initial_step.size() != 0 && config.initial_step.size() != p) {
        throw DomainError("nelder_mead: initial_step has wrong dimension");
    }

    OptimizeResult result;
    auto eval = [&](const Eigen::VectorXd& x) {
        ++result.evaluations;
        const double f = objective(x);
        return std::isfinite(f) ? f : std::numeric_limits<double>::infinity();
    };

    const double f0 = objective(x0);
    ++result.evaluations;
    if (!std::isfinite(f0)) throw DomainError("nelder_mead: objective is not finite at x0");

    std::vector<Eigen::VectorXd> simplex(static_cast<std::size_t>(p + 1), x0);
    std::vector<double> values(static_cast<std::size_t>(p + 1), f0);
    for (Eigen::Index i = 0; i < p; ++i) {
        const double step = config.initial_step.size()
                                ? config.initial_step[i]
                                : 0.1 * std::max(1.0, std::fabs(x0[i]));
        simplex[static_cast<std::size_t>(i + 1)][i] += step;
        values[static_cast<std::size_t>(i + 1)] = eval(simplex[static_cast<std::size_t>(i + 1)]);
    }

    constexpr double kReflect = 1.0, kExpand = 2.0, kContract = 0.5, kShrink = 0.5;
    std::vector<std::size_t> order(simplex.size());
    const auto n_vertices = simplex.size();

    auto sort_simplex = [&] {
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
        std::vector<Eigen::VectorXd> s2(n_vertices);
        std::vector<double> v2(n_vertices);
        for (std::size_t k = 0; k < n_vertices; ++k) {
            s2[k] = simplex[order[k]];
            v2[k] = values[order[k]];
        }
        simplex.swap(s2);
        values.swap(v2);
    };

    auto converged = [&] {
        const double spread = values.back() - values.front();
        if (!(spread <= config.tolerance_f * (1.0 + std::fabs(values.front())))) return false;
        double diameter = 0.0;
        for (std::size_t k = 1; k < n_vertices; ++k) {
            diameter = std::max(diameter, (simplex[k] - simplex[0]).cwiseAbs().maxCoeff());
        }
        return diameter <= config.tolerance_x;
    };

    sort_simplex();
    for (result.iterations = 0; result.iterations < config.max_iterations; ++result.iterations) {
        if (converged()) {
            result.converged = true;
            break;
        }
        Eigen::VectorXd centroid = Eigen::VectorXd::Zero(p);
        for (std::size_t k = 0; k + 1 < n_vertices; ++k) centroid += simplex[k];
        centroid /= static_cast<double>(p);

        const Eigen::VectorXd& worst = simplex.back();
        const Eigen::VectorXd reflected = centroid + kReflect * (centroid - worst);
        const double f_reflected = eval(reflected);

        if (f_reflected < values.front()) {
            const Eigen::VectorXd expanded = centroid + kExpand * (reflected - centroid);
            const double f_expanded = eval(expanded);
            if (f_expanded < f_reflected) {
                simplex.back() = expanded;
                values.back() = f_expanded;
            } else {
                simplex.back() = reflected;
                values.back() = f_reflected;
            }
        } else if (f_reflected < values[n_vertices - 2]) {
            simplex.back() = reflected;
            values.back() = f_reflected;
        } else {
            const bool outside = f_reflected < values.back();
            const Eigen::VectorXd contracted =
                outside ? Eigen::VectorXd(centroid + kContract * (reflected - centroid))
                        : Eigen::VectorXd(centroid + kContract * (worst - centroid));
            const double f_contracted = eval(contracted);
            if (f_contracted < std::min(f_reflected, values.back())) {
                simplex.back() = contracted;
                values.back() = f_contracted;
            } else {
                for (std::size_t k = 1; k < n_vertices; ++k) {
                    simplex[k] = simplex[0] + kShrink * (simplex[k] - simplex[0]);
                    values[k] = eval(simplex[k]);
                }
            }
        }
        sort_simplex();
    }

    result.x = simplex.front();
    result.value = values.front();
    if (result.converged) {
        Eigen::VectorXd centroid = Eigen::VectorXd::Zero(p);
        for (const auto& v : simplex) centroid += v;
        centroid /= static_cast<double>(n_vertices);
        const double f_centroid = eval(centroid);
        if (f_centroid <= result.value) {
            result.x = centroid;
            result.value = f_centroid;
        }
    }
    return result;
}

// ---------------------------------------------------------------------------

namespace {

template <typename Matrix>
void require_hermitian(const Matrix& a, const char* who) {
    if (a.rows() < 1 || a.rows() != a.cols()) {
        throw DomainError(std::string(who) + ": matrix must be square with m >= 1");
    }
    if (!a.allFinite()) throw DomainError(std::string(who) + ": matrix has non-finite entries");
    const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
    const double asym = (a - a.adjoint()).cwiseAbs().maxCoeff();
    if (asym > 1e-10 * scale) {
        throw DomainError(std::string(who) + ": matrix is not Hermitian (asymmetry " +
                          std::to_string(asym) + ")");
    }
}

}  // namespace

template <typename Scalar>
HermitianFactor<Scalar>::HermitianFactor(const Matrix& a) {
    require_hermitian(a, "hpd_solve");
    const Eigen::Index m = a.rows();
    // Exact symmetrization removes rounding-level drift before factoring.
    const Matrix sym = (a + a.adjoint()) * Scalar(0.5);
    const double mean_diag = std::real(sym.trace()) / static_cast<double>(m);

    auto attempt = [&](double jitter) {
        Matrix candidate = sym;
        if (jitter > 0.0) candidate.diagonal().array() += Scalar(jitter);
        Eigen::LLT<Matrix> llt(candidate);
        if (llt.info() != Eigen::Success) return false;
        const Matrix l = llt.matrixL();
        for (Eigen::Index i = 0; i < m; ++i) {
            const double d = std::real(l(i, i));
            if (!(d > 0.0) || !std::isfinite(d)) return false;
        }
        jittered_ = std::move(candidate);
        factor_ = l;
        jitter_ = jitter;
        return true;
    };

    if (attempt(0.0)) return;
    double tried = 0.0;
    for (const double delta : kJitterLadder) {
        tried = delta * std::fabs(mean_diag);
        if (tried > 0.0 && attempt(tried)) return;
    }
    throw SingularMatrixError("hpd_solve: matrix is not positive definite even with jitter " +
                                  std::to_string(tried),
                              tried);
}

template <typename Scalar>
typename HermitianFactor<Scalar>::Matrix HermitianFactor<Scalar>::solve(const Matrix& rhs) const {
    if (rhs.rows() != factor_.rows()) throw DomainError("hpd_solve: rhs has wrong row count");
    auto l = factor_.template triangularView<Eigen::Lower>();
    auto back = [&](const Matrix& b) -> Matrix {
        Matrix y = l.solve(b);
        return l.adjoint().solve(y);
    };
    Matrix x = back(rhs);
    // One step of iterative refinement against the jittered matrix.
    const Matrix residual = rhs - jittered_ * x;
    x += back(residual);
    return x;
}

template <typename Scalar>
double HermitianFactor<Scalar>::log_det() const {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < factor_.rows(); ++i) acc += std::log(std::real(factor_(i, i)));
    return 2.0 * acc;
}

template <typename Scalar>
HpdSolution<Scalar> hpd_solve(const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& a,
                              const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& rhs) {
    const HermitianFactor<Scalar> factor(a);
    return {factor.solve(rhs), factor.jitter()};
}

template class HermitianFactor<double>;
template class HermitianFactor<cdouble>;
template HpdSolution<double> hpd_solve(const Eigen::MatrixXd&, const Eigen::MatrixXd&);
template HpdSolution<cdouble> hpd_solve(const Eigen::MatrixXcd&, const Eigen::MatrixXcd&);

}  // namespace stkrig
