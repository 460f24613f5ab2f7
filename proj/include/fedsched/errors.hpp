#pragma once

#include <stdexcept>
#include <string>

namespace fedsched {

/// Base of every error raised by the library. `exit_code()` is what the CLI
/// returns when the error escapes a subcommand.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
    virtual int exit_code() const noexcept { return 1; }
};

/// A selected client has zero transmission rate (zero gain or zero ratio).
class InfeasibleLink : public Error {
public:
    using Error::Error;
    int exit_code() const noexcept override { return 3; }
};

/// The drift-bound constant cannot be made finite.
class InfeasibleBound : public Error {
public:
    using Error::Error;
    int exit_code() const noexcept override { return 3; }
};

/// Bandwidth problem has no feasible point (m * b_min > 1).
class Infeasible : public Error {
public:
    using Error::Error;
    int exit_code() const noexcept override { return 3; }
};

/// A policy cannot be realised under the system configuration.
class InfeasibleConfig : public Error {
public:
    using Error::Error;
    int exit_code() const noexcept override { return 3; }
};

class NoConverge : public Error {
public:
    using Error::Error;
    int exit_code() const noexcept override { return 3; }
};

/// Exhaustive oracle asked to enumerate more than it supports.
class TooLarge : public Error {
public:
    using Error::Error;
    int exit_code() const noexcept override { return 2; }
};

class ConfigError : public Error {
public:
    using Error::Error;
    int exit_code() const noexcept override { return 2; }
};

class IoError : public Error {
public:
    using Error::Error;
};

/// Calibration bracket cannot reach the requested target.
class Unreachable : public Error {
public:
    using Error::Error;
    int exit_code() const noexcept override { return 3; }
};

}  // namespace fedsched
