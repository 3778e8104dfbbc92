#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <variant>
#include <vector>

namespace tabcheck {

enum class ColumnKind { Integer, Real, Categorical, Datetime };

std::string_view kind_name(ColumnKind kind);
std::optional<ColumnKind> kind_from_name(std::string_view name);

inline bool is_numeric(ColumnKind kind) {
    return kind == ColumnKind::Integer || kind == ColumnKind::Real;
}

/// Microseconds since 1970-01-01T00:00:00, no timezone attached.
struct Timestamp {
    std::int64_t micros = 0;

    auto operator<=>(const Timestamp&) const = default;
};

inline constexpr std::int64_t kMicrosPerSecond = 1'000'000;
inline constexpr std::int64_t kMicrosPerDay = 86'400 * kMicrosPerSecond;

/// Parses `raw` against a format built from the tokens YYYY, MM, DD, hh, mm,
/// ss. Any other format character must match literally, except that a space
/// matches one or more whitespace characters. Two-digit tokens accept one or
/// two digits.
/// Throws Error{ParseError} on malformed input and Error{RangeError} on
/// impossible dates or times such as 31/02 or 25:00.
Timestamp parse_datetime(std::string_view raw, std::string_view format);

/// Renders at second resolution using the same token set as parse_datetime.
std::string format_datetime(Timestamp ts, std::string_view format);

/// Floors a timestamp to midnight of its calendar day.
Timestamp floor_to_day(Timestamp ts);

struct Null {
    bool operator==(const Null&) const = default;
};

/// One cell. The alternative in use must match the column kind or be Null.
using Value = std::variant<Null, std::int64_t, double, std::string, Timestamp>;

inline bool is_null(const Value& v) { return std::holds_alternative<Null>(v); }

/// Numeric view of an Integer or Real cell; nullopt otherwise.
std::optional<double> as_number(const Value& v);

/// Human-readable rendering used in violation samples ("NA" for Null).
std::string display(const Value& v, std::string_view datetime_format = "YYYY-MM-DD hh:mm:ss");

struct Column {
    std::string name;
    ColumnKind kind = ColumnKind::Real;
    std::optional<std::string> datetime_format;

    bool operator==(const Column&) const = default;
};

class Schema {
public:
    Schema() = default;
    /// Validates: names unique and non-empty, datetime_format present iff
    /// the column is a datetime.
    explicit Schema(std::vector<Column> columns);

    std::size_t size() const noexcept { return columns_.size(); }
    const std::vector<Column>& columns() const noexcept { return columns_; }
    const Column& column(std::size_t index) const { return columns_.at(index); }
    std::optional<std::size_t> index_of(std::string_view name) const;
    /// Like index_of but throws Error{UnknownColumn}.
    std::size_t require(std::string_view name) const;

    bool operator==(const Schema& other) const { return columns_ == other.columns_; }

private:
    std::vector<Column> columns_;
    std::unordered_map<std::string, std::size_t> index_;
};

/// Reads the schema text format: one `<name>: <kind>[ format="<fmt>"]` per
/// line. Blank lines and lines starting with '#' are ignored.
Schema parse_schema(std::string_view text);
Schema load_schema(const std::filesystem::path& path);
std::string schema_to_text(const Schema& schema);

using Row = std::vector<Value>;

class Table {
public:
    Table() = default;
    explicit Table(Schema schema) : schema_(std::move(schema)) {}
    /// Checks that every row has one cell per column and every cell matches
    /// its column kind.
    Table(Schema schema, std::vector<Row> rows);

    const Schema& schema() const noexcept { return schema_; }
    std::size_t row_count() const noexcept { return rows_.size(); }
    std::size_t column_count() const noexcept { return schema_.size(); }

    std::span<const Value> row(std::size_t index) const { return rows_.at(index); }
    const std::vector<Row>& rows() const noexcept { return rows_; }
    const Value& cell(std::size_t row, std::size_t column) const { return rows_[row][column]; }

    std::vector<Value> column(std::size_t index) const;
    std::vector<Value> column(std::string_view name) const;

    void append(Row row);
    void set_cell(std::size_t row, std::size_t column, Value value);

    /// Rows at the given indices, in the given order.
    Table select(std::span<const std::size_t> indices) const;

    bool operator==(const Table& other) const = default;

private:
    void check_cell(std::size_t column, const Value& value) const;

    Schema schema_;
    std::vector<Row> rows_;
};

struct CsvOptions {
    char delimiter = ',';
    char quote = '"';
    /// Unparseable cells become Null instead of raising ParseError.
    bool lenient = false;
    /// Unquoted fields equal to one of these map to Null.
    std::vector<std::string> null_tokens{"", "NA"};
};

/// RFC 4180 reader. Header names must match the schema names (any order);
/// the resulting Table uses the schema's column order.
Table load_table(const std::filesystem::path& path, const Schema& schema,
                 const CsvOptions& options = {});
Table read_table(std::istream& in, const Schema& schema, const CsvOptions& options = {});

/// Writes the header in schema order. Reals use shortest round-trip
/// formatting, datetimes their column format, Null an empty field.
void write_table(std::ostream& out, const Table& table, const CsvOptions& options = {});
void save_table(const std::filesystem::path& path, const Table& table,
                const CsvOptions& options = {});

/// Splits one CSV record. Exposed for the tuple-file reader and tests.
/// `quoted` receives, per field, whether it was quoted.
bool read_csv_record(std::istream& in, std::vector<std::string>& fields,
                     std::vector<bool>& quoted, const CsvOptions& options);

}  // namespace tabcheck
