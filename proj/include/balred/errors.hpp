#pragma once

#include <stdexcept>
#include <string>

namespace balred {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Non-conformal operand shapes.
class DimensionError : public Error {
public:
    using Error::Error;
};

/// Unsupported argument value (e.g. a Schatten index other than 2 or infinity).
class ArgumentError : public Error {
public:
    using Error::Error;
};

/// Lyapunov/Sylvester operator is (numerically) singular.
class SingularEquationError : public Error {
public:
    using Error::Error;
};

class NotPsdError : public Error {
public:
    using Error::Error;
};

class NotPdError : public Error {
public:
    using Error::Error;
};

/// A stable state matrix was required.
class StabilityError : public Error {
public:
    using Error::Error;
};

/// Requested reduction rank exceeds the numerical Hankel rank.
class RankError : public Error {
public:
    RankError(const std::string& what, std::size_t numerical_rank)
        : Error(what), numerical_rank_(numerical_rank) {}

    std::size_t numerical_rank() const noexcept { return numerical_rank_; }

private:
    std::size_t numerical_rank_;
};

/// A Gramian vanished, so the prior-driven system has no balanced realization.
class DegenerateSystemError : public Error {
public:
    using Error::Error;
};

class NumericalInconsistencyError : public Error {
public:
    using Error::Error;
};

/// Prior mean outside the range of the prior covariance factor.
class HypothesisError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

}  // namespace balred
