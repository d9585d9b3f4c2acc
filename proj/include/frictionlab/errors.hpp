#pragma once

#include <stdexcept>
#include <string>

namespace frictionlab {

// Common base so callers can catch everything the library raises.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// A value is outside its documented domain or a call precondition failed.
class ParameterError : public Error {
public:
    explicit ParameterError(const std::string& msg) : Error(msg) {}
};

// Too few observations for the requested statistic or fit.
class InsufficientDataError : public Error {
public:
    explicit InsufficientDataError(const std::string& msg) : Error(msg) {}
};

// A simulated trial failed to absorb within the max-time guard; this
// signals a degenerate parameterization, not a legitimate slow decision.
class RunawayTrialError : public Error {
public:
    explicit RunawayTrialError(const std::string& msg) : Error(msg) {}
};

// An iterative numeric routine failed to converge.
class NumericError : public Error {
public:
    explicit NumericError(const std::string& msg) : Error(msg) {}
};

// Bad or missing configuration (files, CLI, untrained models).
class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& msg) : Error(msg) {}
};

// An input file does not match the documented column/field schema.
class SchemaError : public Error {
public:
    explicit SchemaError(const std::string& msg) : Error(msg) {}
};

// A sampler finished in a state that cannot be trusted (e.g. acceptance
// rate collapsed); results are withheld rather than reported.
class DiagnosticsError : public Error {
public:
    explicit DiagnosticsError(const std::string& msg) : Error(msg) {}
};

// A debate pool of structurally identical agents was asked to produce
// scaffolded friction; such a debate carries no real divergence.
class PseudoDebateError : public Error {
public:
    explicit PseudoDebateError(const std::string& msg) : Error(msg) {}
};

// A condition was requested in a domain whose risk profile forbids it.
class PolicyViolationError : public Error {
public:
    PolicyViolationError(const std::string& msg, std::string rationale)
        : Error(msg), rationale_(std::move(rationale)) {}
    const std::string& rationale() const { return rationale_; }

private:
    std::string rationale_;
};

// Filesystem failures, always carrying the offending path.
class IoError : public Error {
public:
    IoError(const std::string& msg, std::string path)
        : Error(msg + ": " + path), path_(std::move(path)) {}
    const std::string& path() const { return path_; }

private:
    std::string path_;
};

} // namespace frictionlab
