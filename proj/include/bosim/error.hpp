#pragma once

#include <stdexcept>
#include <string>

namespace bosim {

/// Bad user-supplied arguments (dimensions, spacings, indices out of range).
class InvalidInput : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Inconsistent configuration: tables, schedules, solver settings.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Property evaluation outside the tabulated range.
class OutOfRange : public std::out_of_range {
public:
    using std::out_of_range::out_of_range;
};

/// Internal contract broken by a caller (shape mismatch, stale ghosts).
class ContractViolation : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// Krylov recurrence broke down or produced non-finite values.
class DivergenceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Incomplete factorization hit a zero pivot that the shift retry could not fix.
class FactorizationError : public std::runtime_error {
public:
    FactorizationError(const std::string& what, long row)
        : std::runtime_error(what), row_(row) {}
    long row() const noexcept { return row_; }

private:
    long row_;
};

/// Newton failed to converge or the timestep controller gave up.
class NonConvergence : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// File could not be opened or written.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Deck syntax or validation error carrying a source location.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& msg, std::string file, int line, int column)
        : std::runtime_error(file + ":" + std::to_string(line) + ":" + std::to_string(column) + ": " + msg),
          file_(std::move(file)), line_(line), column_(column) {}

    const std::string& file() const noexcept { return file_; }
    int line() const noexcept { return line_; }
    int column() const noexcept { return column_; }

private:
    std::string file_;
    int line_;
    int column_;
};

} // namespace bosim
