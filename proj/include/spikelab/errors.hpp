#pragma once

#include <stdexcept>
#include <string>

namespace spikelab {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of an operation (divergent integral, point outside Ω, ...).
class DomainError : public Error {
public:
    using Error::Error;
};

/// Caller violated a documented precondition (δ too large, centers too close, ...).
class PreconditionError : public Error {
public:
    using Error::Error;
};

/// A numerical result could not be produced to the configured accuracy.
class AccuracyError : public Error {
public:
    AccuracyError(const std::string& what, double defect) : Error(what), defect_(defect) {}
    double defect() const noexcept { return defect_; }

private:
    double defect_;
};

/// Least-squares system too ill-conditioned to trust.
class ConditioningError : public Error {
public:
    ConditioningError(const std::string& what, double condition) : Error(what), condition_(condition) {}
    double condition() const noexcept { return condition_; }

private:
    double condition_;
};

class NotCertifiableError : public Error {
public:
    using Error::Error;
};

class BracketError : public Error {
public:
    using Error::Error;
};

class NoCrossingError : public Error {
public:
    using Error::Error;
};

class StepSizeError : public Error {
public:
    using Error::Error;
};

class BoundaryMinimizerError : public Error {
public:
    using Error::Error;
};

class InsufficientDataError : public Error {
public:
    using Error::Error;
};

/// Malformed configuration or input file; message names the offending key.
class ConfigError : public Error {
public:
    using Error::Error;
};

}  // namespace spikelab
