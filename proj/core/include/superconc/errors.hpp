#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace superconc {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// An argument lies outside the mathematical domain of an operation.
class DomainError : public Error {
public:
    using Error::Error;
};

/// A lag or coordinate is outside the tabulated range of a covariance table.
class RangeError : public Error {
public:
    using Error::Error;
};

/// Inconsistent or invalid configuration (e.g. a trivial covering).
class ConfigError : public Error {
public:
    using Error::Error;
};

/// A model fails a structural hypothesis required by a bound pipeline.
class HypothesisError : public Error {
public:
    using Error::Error;
};

/// A parameter constraint of an analytic route is violated.
class ConstraintError : public Error {
public:
    using Error::Error;
};

/// A requested allocation exceeds the configured memory cap.
class CapacityError : public Error {
public:
    CapacityError(const std::string& what, std::size_t requested, std::size_t cap)
        : Error(what), requested_(requested), cap_(cap) {}
    std::size_t requested() const noexcept { return requested_; }
    std::size_t cap() const noexcept { return cap_; }

private:
    std::size_t requested_;
    std::size_t cap_;
};

/// Cholesky factorization failed; `minor()` is the zero-based index of the
/// first leading minor that is not numerically positive definite.
class DecompositionError : public Error {
public:
    DecompositionError(const std::string& what, std::size_t minor, double pivot)
        : Error(what), minor_(minor), pivot_(pivot) {}
    std::size_t minor() const noexcept { return minor_; }
    double pivot() const noexcept { return pivot_; }

private:
    std::size_t minor_;
    double pivot_;
};

/// Circulant embedding produced a negative eigenvalue at every padding tried.
class EmbeddingError : public Error {
public:
    EmbeddingError(const std::string& what, double most_negative,
                   std::vector<std::size_t> attempted_sizes)
        : Error(what),
          most_negative_(most_negative),
          attempted_sizes_(std::move(attempted_sizes)) {}
    double most_negative() const noexcept { return most_negative_; }
    const std::vector<std::size_t>& attempted_sizes() const noexcept { return attempted_sizes_; }

private:
    double most_negative_;
    std::vector<std::size_t> attempted_sizes_;
};

}  // namespace superconc
