#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace tabcheck {

enum class Errc {
    FileNotFound,
    HeaderMismatch,
    DuplicateHeader,
    ParseError,
    RangeError,
    SyntaxError,
    UnknownColumn,
    TypeError,
    NonCategoricalColumn,
    EmptyReference,
    SchemaMismatch,
    EmptyTable,
    DegenerateData,
    SingularCovariance,
    DimensionMismatch,
    InsufficientRows,
    UnknownTarget,
    InvalidArgument,
    IoError,
};

std::string_view errc_name(Errc code);

// Base of every error raised by the library. The code identifies the failure
// class; the message is meant for humans.
class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& message)
        : std::runtime_error(std::string(errc_name(code)) + ": " + message), code_(code) {}

    Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

// A cell that could not be converted to its column's kind.
class CellParseError : public Error {
public:
    CellParseError(std::size_t row, std::string column, std::string raw, const std::string& why)
        : Error(Errc::ParseError, "row " + std::to_string(row) + ", column '" + column +
                                      "': cannot parse '" + raw + "'" +
                                      (why.empty() ? "" : " (" + why + ")")),
          row_(row), column_(std::move(column)), raw_(std::move(raw)) {}

    std::size_t row() const noexcept { return row_; }
    const std::string& column() const noexcept { return column_; }
    const std::string& raw() const noexcept { return raw_; }

private:
    std::size_t row_;
    std::string column_;
    std::string raw_;
};

// Error anchored at a 1-based line/column of a text source (rule file,
// schema file, expression).
class SourceError : public Error {
public:
    SourceError(Errc code, std::size_t line, std::size_t column, const std::string& message)
        : Error(code, std::to_string(line) + ":" + std::to_string(column) + ": " + message),
          line_(line), column_(column), detail_(message) {}

    std::size_t line() const noexcept { return line_; }
    std::size_t column() const noexcept { return column_; }
    const std::string& detail() const noexcept { return detail_; }

private:
    std::size_t line_;
    std::size_t column_;
    std::string detail_;
};

}  // namespace tabcheck
