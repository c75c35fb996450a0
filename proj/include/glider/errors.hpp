#pragma once

#include <stdexcept>
#include <string>

namespace glider {

// Base of everything thrown by this library.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Non-finite or otherwise out-of-domain numeric input.
struct DomainError : Error {
    using Error::Error;
};

// Inconsistent configuration: dimension mismatch, violated invariant.
struct ConfigError : Error {
    ConfigError(std::string field_, const std::string& msg)
        : Error("config field '" + field_ + "': " + msg), field(std::move(field_)) {}
    std::string field;
};

// Malformed input file; carries the offending line number.
struct ParseError : Error {
    ParseError(std::string source_, long line_, const std::string& msg)
        : Error(source_ + ":" + std::to_string(line_) + ": " + msg),
          source(std::move(source_)),
          line(line_) {}
    std::string source;
    long line;
};

// Bad record stream handed to an estimator run (non-monotone time, overlap).
struct InputError : Error {
    using Error::Error;
};

// Simulation state left its sanity envelope.
struct SimulationError : Error {
    using Error::Error;
};

// Estimator state became non-finite or the innovation exceeded the guard.
struct DivergenceError : Error {
    using Error::Error;
};

// Filesystem failures.
struct IoError : Error {
    using Error::Error;
};

}  // namespace glider
