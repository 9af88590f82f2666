#pragma once

#include <stdexcept>
#include <string>

namespace contextox {

/// Bad configuration: invalid options, missing files named on the command
/// line, impossible ratios. Maps to CLI exit code 2.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Data violates a contract: unknown ids, length mismatches, duplicate keys.
/// Maps to CLI exit code 3.
class IntegrityError : public std::runtime_error {
public:
    explicit IntegrityError(const std::string& what) : std::runtime_error(what) {}
};

/// Malformed input record. Carries the 1-based line number of the offender.
class ParseError : public IntegrityError {
public:
    ParseError(const std::string& what, long line)
        : IntegrityError(what + " (line " + std::to_string(line) + ")"), line_(line) {}

    long line() const { return line_; }

private:
    long line_;
};

/// Training aborted on a non-finite loss. Carries epoch and batch diagnostics.
class TrainingDivergedError : public std::runtime_error {
public:
    TrainingDivergedError(const std::string& what, int epoch, int batch)
        : std::runtime_error(what + " (epoch " + std::to_string(epoch) + ", batch " +
                             std::to_string(batch) + ")"),
          epoch_(epoch),
          batch_(batch) {}

    int epoch() const { return epoch_; }
    int batch() const { return batch_; }

private:
    int epoch_;
    int batch_;
};

} // namespace contextox
