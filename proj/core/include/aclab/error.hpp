#pragma once

#include <cstdio>
#include <stdexcept>
#include <string>

namespace aclab {

/// Base class of every error raised by the library. The CLI maps the
/// concrete subclasses onto process exit codes.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Precondition violated by an argument (non-finite input, bad radius, ...).
class DomainError : public Error {
public:
    using Error::Error;
};

/// Invalid or inconsistent configuration, detected before any compute.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// A grid too coarse for the requested geometry or scale.
class ResolutionError : public ConfigError {
public:
    using ConfigError::ConfigError;
};

/// Sampled well constants do not satisfy the quadratic trapping bounds.
class ConstantsError : public Error {
public:
    using Error::Error;
};

/// Iterative solver failed (iteration cap, exhausted backtracking).
class SolverError : public Error {
public:
    SolverError(const std::string& what, double last_residual)
        : Error(what + " (last residual " + format(last_residual) + ")"),
          last_residual_(last_residual) {}

    double last_residual() const noexcept { return last_residual_; }

private:
    static std::string format(double x) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.3e", x);
        return buf;
    }
    double last_residual_;
};

/// Malformed snapshot or unexpected file content.
class FormatError : public Error {
public:
    using Error::Error;
};

/// Snapshot written by a format revision this build does not read.
class UnsupportedVersionError : public FormatError {
public:
    using FormatError::FormatError;
};

/// Filesystem failure.
class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace aclab
