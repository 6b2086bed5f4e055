#pragma once

#include <stdexcept>
#include <string>

namespace sltgp {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
public:
    using Error::Error;
};

class NotPositiveDefinite : public Error {
public:
    using Error::Error;
};

class InvalidBracket : public Error {
public:
    using Error::Error;
};

class DimensionMismatch : public Error {
public:
    using Error::Error;
};

class RhoOutOfRange : public Error {
public:
    using Error::Error;
};

/// Argument outside the mathematical domain of a bound constant.
class DomainError : public Error {
public:
    using Error::Error;
};

class UnknownGenerator : public Error {
public:
    using Error::Error;
};

class ROutOfRange : public Error {
public:
    using Error::Error;
};

class ParseError : public Error {
public:
    ParseError(const std::string& what, long row, long column)
        : Error(what + " (row " + std::to_string(row) + ", column " + std::to_string(column) + ")"),
          row_(row), column_(column) {}

    [[nodiscard]] long row() const { return row_; }
    [[nodiscard]] long column() const { return column_; }

private:
    long row_;
    long column_;
};

class ColumnOverlap : public Error {
public:
    using Error::Error;
};

class SingleClass : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

}  // namespace sltgp
