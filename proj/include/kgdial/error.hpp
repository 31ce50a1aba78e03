#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace kgdial {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input record. `line()` is 1-based; 0 means "whole source".
class ParseError : public Error {
public:
    ParseError(const std::string& source, std::size_t line, const std::string& message)
        : Error(line == 0 ? source + ": " + message
                          : source + ":" + std::to_string(line) + ": " + message),
          line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

/// Transport-level provider failure that survived all retries.
class ProviderError : public Error {
public:
    using Error::Error;
};

/// A provider answered, but the answer is unusable (e.g. empty).
class GenerationError : public Error {
public:
    using Error::Error;
};

class StageError : public Error {
public:
    StageError(std::string stage, const std::string& message)
        : Error(stage + ": " + message), stage_(std::move(stage)) {}

    const std::string& stage() const noexcept { return stage_; }

private:
    std::string stage_;
};

} // namespace kgdial
