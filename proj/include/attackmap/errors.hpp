#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace attackmap {

/// Base of every domain error thrown by the library. The CLI maps these to
/// exit code 1 and the HTTP service maps them to 4xx responses.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input (JSON, CSV, model files). `line()` is 0 when unknown.
class ParseError : public Error {
public:
    explicit ParseError(const std::string& message, std::size_t line = 0)
        : Error(line ? message + " (line " + std::to_string(line) + ")" : message), line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class SchemaError : public Error {
public:
    using Error::Error;
};

/// Rows that reference labels outside the registry.
class ImportError : public Error {
public:
    ImportError(const std::string& message, std::vector<std::size_t> rows)
        : Error(message), rows_(std::move(rows)) {}
    const std::vector<std::size_t>& rows() const noexcept { return rows_; }

private:
    std::vector<std::size_t> rows_;
};

class EmptyCorpusError : public Error {
public:
    using Error::Error;
};

class MergeError : public Error {
public:
    using Error::Error;
};

class FitError : public Error {
public:
    using Error::Error;
};

class TrainError : public Error {
public:
    using Error::Error;
};

class PredictError : public Error {
public:
    using Error::Error;
};

class ArgumentError : public Error {
public:
    using Error::Error;
};

class FormatError : public Error {
public:
    using Error::Error;
};

class ValidationError : public Error {
public:
    ValidationError(const std::string& message, std::size_t row = 0) : Error(message), row_(row) {}
    std::size_t row() const noexcept { return row_; }

private:
    std::size_t row_;
};

}  // namespace attackmap
