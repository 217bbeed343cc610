#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace stkrig {

// Argument outside an operation's domain (bad index, n < 2, invalid params...).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

class RangeError : public std::range_error {
public:
    using std::range_error::range_error;
};

// Factorization failed even at the largest jitter on the ladder.
class SingularMatrixError : public std::runtime_error {
public:
    SingularMatrixError(const std::string& what, double attempted_jitter)
        : std::runtime_error(what), jitter_(attempted_jitter) {}
    double attempted_jitter() const noexcept { return jitter_; }

private:
    double jitter_;
};

// Hessian of the Whittle criterion is not invertible.
class SingularHessianError : public std::runtime_error {
public:
    SingularHessianError(const std::string& what, std::vector<double> eigenvalues)
        : std::runtime_error(what), eigenvalues_(std::move(eigenvalues)) {}
    const std::vector<double>& eigenvalues() const noexcept { return eigenvalues_; }

private:
    std::vector<double> eigenvalues_;
};

// Criterion evaluated to a non-finite value (e.g. variogram underflow).
class EvaluationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class EstimationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed input file; message names the offending row/column.
class LoadError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace stkrig
