#pragma once

#include <stdexcept>
#include <string>

namespace subslope {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Two fields (or a field and a geometry) live on different grids.
class GeometryMismatch : public Error {
public:
    using Error::Error;
};

/// Reference metric chi is not positive definite somewhere.
class InvalidMetric : public Error {
public:
    using Error::Error;
};

/// Eigenvalue vector outside the operator's cone, or an argument out of range.
class DomainError : public Error {
public:
    using Error::Error;
};

class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// Newton linear system could not be solved to the required accuracy.
class SingularLinearization : public Error {
public:
    using Error::Error;
};

/// Newton did not converge at a given t; the caller is expected to shrink the step.
class StepFailure : public Error {
public:
    using Error::Error;
};

/// Continuation could not reach t = 1.
class PathFailure : public Error {
public:
    using Error::Error;
};

/// A path monitor (c_t bounds, subsolution margin, boundary condition) was violated.
class MonitorBreach : public Error {
public:
    MonitorBreach(const std::string& what, std::string log_csv)
        : Error(what), log_(std::move(log_csv)) {}

    /// Full monitor log (CSV) up to and including the breaching step.
    const std::string& log() const noexcept { return log_; }

private:
    std::string log_;
};

/// Candidate potential does not satisfy the subsolution precondition.
class NotSubsolution : public Error {
public:
    using Error::Error;
};

class NoAdmissibleTrial : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    ConfigError(const std::string& what, int line = 0, std::string key = {})
        : Error(format(what, line, key)), line_(line), key_(std::move(key)) {}

    int line() const noexcept { return line_; }
    const std::string& key() const noexcept { return key_; }

private:
    static std::string format(const std::string& what, int line, const std::string& key) {
        std::string out = "config";
        if (line > 0) out += " line " + std::to_string(line);
        if (!key.empty()) out += " key '" + key + "'";
        return out + ": " + what;
    }

    int line_;
    std::string key_;
};

class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace subslope
