#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace m2spec {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidParameter : public Error {
public:
    using Error::Error;
};

class DimensionMismatch : public Error {
public:
    using Error::Error;
};

class OverflowError : public Error {
public:
    using Error::Error;
};

/// Summation index set is empty because some |k_j| >= N_j.
class EmptyIndexSet : public Error {
public:
    using Error::Error;
};

/// A recursive section was asked to run with a root outside the unit disc.
class InstabilityError : public Error {
public:
    using Error::Error;
};

class TruncationTooLarge : public Error {
public:
    using Error::Error;
};

class IncompleteLagWindow : public Error {
public:
    using Error::Error;
};

/// Raised when a nodewise inversion meets an ill-conditioned matrix.
class NearSingularNode : public Error {
public:
    NearSingularNode(const std::string& what, std::vector<double> theta, double condition)
        : Error(what), theta_(std::move(theta)), condition_(condition) {}

    const std::vector<double>& theta() const noexcept { return theta_; }
    double condition() const noexcept { return condition_; }

private:
    std::vector<double> theta_;
    double condition_;
};

class UndefinedTransfer : public Error {
public:
    using Error::Error;
};

class ZeroDenominator : public Error {
public:
    using Error::Error;
};

class GridMismatch : public Error {
public:
    using Error::Error;
};

class FormatError : public Error {
public:
    FormatError(const std::string& what, std::size_t line)
        : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// Configuration problems; `key()` names the offending entry.
class ConfigError : public Error {
public:
    ConfigError(std::string key, const std::string& what)
        : Error("config key '" + key + "': " + what), key_(std::move(key)) {}

    const std::string& key() const noexcept { return key_; }

private:
    std::string key_;
};

}  // namespace m2spec
