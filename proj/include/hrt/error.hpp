#pragma once

#include <stdexcept>
#include <string>

namespace hrt {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of a function (e.g. a quantile at u = 1).
class DomainError : public Error {
public:
    using Error::Error;
};

/// Sample without variation (constant residuals, zero scale estimate, ...).
class DegenerateSampleError : public Error {
public:
    using Error::Error;
};

/// Least-squares design matrix without full column rank.
class RankDeficiencyError : public Error {
public:
    using Error::Error;
};

/// Orthogonalization prefactor (J_g / sigma^2 - 1)^(-1/2) is unusable for this sigma.
class IllConditionedError : public Error {
public:
    using Error::Error;
};

/// Quadrature or root finding did not reach the requested tolerance.
class NumericalError : public Error {
public:
    using Error::Error;
};

/// Invalid parameter combination (non-PSD covariance, bad grid, unknown name, ...).
class ParameterError : public Error {
public:
    using Error::Error;
};

/// Unreadable input file or malformed input data.
class IoError : public Error {
public:
    using Error::Error;
};

/// Near-unit root in the estimated AR polynomial of the differences.
class NearUnitRootError : public Error {
public:
    using Error::Error;
};

}  // namespace hrt
