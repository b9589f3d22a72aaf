#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace parfix {

/// Base class for every error thrown by the library.
class error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Operands of incompatible dimension.
class dimension_error : public error {
public:
    using error::error;
};

/// A NaN or infinity reached a Vector or Matrix.
class non_finite_error : public error {
public:
    using error::error;
};

/// An operation was asked to do something its inputs do not support
/// (projecting onto an Intersection, a subgradient step with g = 0, ...).
class domain_error : public error {
public:
    using error::error;
};

/// Invalid configuration: malformed problem, invalid schedule, operator
/// hypotheses not met by a scheme. Carries a path to the offending field.
class config_error : public error {
public:
    config_error(std::string path, const std::string& message)
        : error(path.empty() ? message : path + ": " + message),
          path_(std::move(path)), message_(message) {}

    const std::string& path() const noexcept { return path_; }
    const std::string& message() const noexcept { return message_; }

private:
    std::string path_;
    std::string message_;
};

/// The oracle could not certify a result (e.g. Dykstra did not settle).
class oracle_error : public error {
public:
    using error::error;
};

} // namespace parfix
