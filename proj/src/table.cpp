#include "tabcheck/table.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <unordered_set>

#include "tabcheck/error.hpp"
#include "text_util.hpp"

namespace tabcheck {

std::string_view errc_name(Errc code) {
    switch (code) {
        case Errc::FileNotFound: return "FileNotFound";
        case Errc::HeaderMismatch: return "HeaderMismatch";
        case Errc::DuplicateHeader: return "DuplicateHeader";
        case Errc::ParseError: return "ParseError";
        case Errc::RangeError: return "RangeError";
        case Errc::SyntaxError: return "SyntaxError";
        case Errc::UnknownColumn: return "UnknownColumn";
        case Errc::TypeError: return "TypeError";
        case Errc::NonCategoricalColumn: return "NonCategoricalColumn";
        case Errc::EmptyReference: return "EmptyReference";
        case Errc::SchemaMismatch: return "SchemaMismatch";
        case Errc::EmptyTable: return "EmptyTable";
        case Errc::DegenerateData: return "DegenerateData";
        case Errc::SingularCovariance: return "SingularCovariance";
        case Errc::DimensionMismatch: return "DimensionMismatch";
        case Errc::InsufficientRows: return "InsufficientRows";
        case Errc::UnknownTarget: return "UnknownTarget";
        case Errc::InvalidArgument: return "InvalidArgument";
        case Errc::IoError: return "IoError";
    }
    return "Error";
}

std::string_view kind_name(ColumnKind kind) {
    switch (kind) {
        case ColumnKind::Integer: return "integer";
        case ColumnKind::Real: return "real";
        case ColumnKind::Categorical: return "categorical";
        case ColumnKind::Datetime: return "datetime";
    }
    return "?";
}

std::optional<ColumnKind> kind_from_name(std::string_view name) {
    if (name == "integer") return ColumnKind::Integer;
    if (name == "real") return ColumnKind::Real;
    if (name == "categorical") return ColumnKind::Categorical;
    if (name == "datetime") return ColumnKind::Datetime;
    return std::nullopt;
}

// ─── datetime ────────────────────────────────────────────────────────────

namespace {

enum class DtField { Year, Month, Day, Hour, Minute, Second };

struct DtToken {
    bool is_field = false;
    DtField field = DtField::Year;
    int width = 0;
    char literal = 0;
};

std::vector<DtToken> tokenize_format(std::string_view format) {
    std::vector<DtToken> tokens;
    std::size_t i = 0;
    auto starts = [&](std::string_view tok) { return format.substr(i, tok.size()) == tok; };
    while (i < format.size()) {
        DtToken t;
        if (starts("YYYY")) {
            t = {true, DtField::Year, 4, 0};
            i += 4;
        } else if (starts("MM")) {
            t = {true, DtField::Month, 2, 0};
            i += 2;
        } else if (starts("DD")) {
            t = {true, DtField::Day, 2, 0};
            i += 2;
        } else if (starts("hh")) {
            t = {true, DtField::Hour, 2, 0};
            i += 2;
        } else if (starts("mm")) {
            t = {true, DtField::Minute, 2, 0};
            i += 2;
        } else if (starts("ss")) {
            t = {true, DtField::Second, 2, 0};
            i += 2;
        } else {
            t.literal = format[i++];
        }
        tokens.push_back(t);
    }
    return tokens;
}

[[noreturn]] void bad_datetime(std::string_view raw, std::string_view format, const std::string& why) {
    throw Error(Errc::ParseError,
                "datetime '" + std::string(raw) + "' does not match '" + std::string(format) + "': " + why);
}

}  // namespace

Timestamp parse_datetime(std::string_view raw, std::string_view format) {
    const std::string_view text = trim(raw);
    int fields[6] = {1970, 1, 1, 0, 0, 0};
    std::size_t pos = 0;
    for (const DtToken& tok : tokenize_format(format)) {
        if (tok.is_field) {
            const std::size_t start = pos;
            // Year needs all four digits; the rest accept one or two.
            while (pos < text.size() && pos - start < static_cast<std::size_t>(tok.width) &&
                   std::isdigit(static_cast<unsigned char>(text[pos]))) {
                ++pos;
            }
            const std::size_t len = pos - start;
            if (len == 0 || (tok.field == DtField::Year && len != 4)) {
                bad_datetime(raw, format, "expected digits at offset " + std::to_string(start));
            }
            int value = 0;
            std::from_chars(text.data() + start, text.data() + pos, value);
            fields[static_cast<int>(tok.field)] = value;
        } else if (tok.literal == ' ') {
            if (pos >= text.size() || !std::isspace(static_cast<unsigned char>(text[pos]))) {
                bad_datetime(raw, format, "expected whitespace at offset " + std::to_string(pos));
            }
            while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
        } else {
            if (pos >= text.size() || text[pos] != tok.literal) {
                bad_datetime(raw, format, std::string("expected '") + tok.literal + "' at offset " +
                                              std::to_string(pos));
            }
            ++pos;
        }
    }
    if (pos != text.size()) bad_datetime(raw, format, "trailing characters");

    using namespace std::chrono;
    const year_month_day ymd{year{fields[0]}, month{static_cast<unsigned>(fields[1])},
                             day{static_cast<unsigned>(fields[2])}};
    if (!ymd.ok()) {
        throw Error(Errc::RangeError, "impossible date '" + std::string(raw) + "'");
    }
    if (fields[3] > 23 || fields[4] > 59 || fields[5] > 59) {
        throw Error(Errc::RangeError, "impossible time of day '" + std::string(raw) + "'");
    }
    const std::int64_t days = sys_days{ymd}.time_since_epoch().count();
    const std::int64_t seconds = days * 86'400 + fields[3] * 3600 + fields[4] * 60 + fields[5];
    return Timestamp{seconds * kMicrosPerSecond};
}

Timestamp floor_to_day(Timestamp ts) {
    std::int64_t days = ts.micros / kMicrosPerDay;
    if (ts.micros % kMicrosPerDay < 0) --days;
    return Timestamp{days * kMicrosPerDay};
}

std::string format_datetime(Timestamp ts, std::string_view format) {
    using namespace std::chrono;
    const Timestamp midnight = floor_to_day(ts);
    const std::int64_t days = midnight.micros / kMicrosPerDay;
    const std::int64_t secs_of_day = (ts.micros - midnight.micros) / kMicrosPerSecond;
    const year_month_day ymd{sys_days{std::chrono::days{days}}};
    const int values[6] = {static_cast<int>(ymd.year()), static_cast<int>(unsigned(ymd.month())),
                           static_cast<int>(unsigned(ymd.day())), static_cast<int>(secs_of_day / 3600),
                           static_cast<int>(secs_of_day / 60 % 60), static_cast<int>(secs_of_day % 60)};
    std::string out;
    char buf[16];
    for (const DtToken& tok : tokenize_format(format)) {
        if (tok.is_field) {
            std::snprintf(buf, sizeof buf, "%0*d", tok.width, values[static_cast<int>(tok.field)]);
            out += buf;
        } else {
            out += tok.literal;
        }
    }
    return out;
}

// ─── values ──────────────────────────────────────────────────────────────

std::optional<double> as_number(const Value& v) {
    if (const auto* i = std::get_if<std::int64_t>(&v)) return static_cast<double>(*i);
    if (const auto* d = std::get_if<double>(&v)) return *d;
    return std::nullopt;
}

std::string display(const Value& v, std::string_view datetime_format) {
    struct Visitor {
        std::string_view fmt;
        std::string operator()(const Null&) const { return "NA"; }
        std::string operator()(std::int64_t i) const { return std::to_string(i); }
        std::string operator()(double d) const { return format_real(d); }
        std::string operator()(const std::string& s) const { return s; }
        std::string operator()(Timestamp t) const { return format_datetime(t, fmt); }
    };
    return std::visit(Visitor{datetime_format}, v);
}

// ─── schema ──────────────────────────────────────────────────────────────

Schema::Schema(std::vector<Column> columns) : columns_(std::move(columns)) {
    for (std::size_t i = 0; i < columns_.size(); ++i) {
        const Column& c = columns_[i];
        if (c.name.empty()) {
            throw Error(Errc::InvalidArgument, "column " + std::to_string(i) + " has an empty name");
        }
        if (!index_.emplace(c.name, i).second) {
            throw Error(Errc::InvalidArgument, "duplicate column name '" + c.name + "'");
        }
        const bool is_dt = c.kind == ColumnKind::Datetime;
        if (is_dt != c.datetime_format.has_value()) {
            throw Error(Errc::InvalidArgument,
                        "column '" + c.name + "': a format is required for, and only allowed on, datetime columns");
        }
    }
}

std::optional<std::size_t> Schema::index_of(std::string_view name) const {
    const auto it = index_.find(std::string(name));
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

std::size_t Schema::require(std::string_view name) const {
    if (auto idx = index_of(name)) return *idx;
    throw Error(Errc::UnknownColumn, "no column named '" + std::string(name) + "'");
}

Schema parse_schema(std::string_view text) {
    std::vector<Column> columns;
    std::size_t line_no = 0;
    for (std::string_view line : split_lines(text)) {
        ++line_no;
        const std::string_view stripped = trim(line);
        if (stripped.empty() || stripped.front() == '#') continue;
        const auto colon = stripped.find(':');
        if (colon == std::string_view::npos) {
            throw SourceError(Errc::SyntaxError, line_no, 1, "expected '<name>: <kind>'");
        }
        Column col;
        col.name = std::string(trim(stripped.substr(0, colon)));
        if (!is_identifier(col.name)) {
            throw SourceError(Errc::SyntaxError, line_no, 1, "invalid column name '" + col.name + "'");
        }
        std::string_view rest = trim(stripped.substr(colon + 1));
        const auto space = rest.find_first_of(" \t");
        const std::string_view kind_text = rest.substr(0, space);
        const auto kind = kind_from_name(kind_text);
        if (!kind) {
            throw SourceError(Errc::SyntaxError, line_no, colon + 2,
                              "unknown column kind '" + std::string(kind_text) + "'");
        }
        col.kind = *kind;
        rest = space == std::string_view::npos ? std::string_view{} : trim(rest.substr(space));
        if (!rest.empty()) {
            constexpr std::string_view prefix = "format=\"";
            if (rest.substr(0, prefix.size()) != prefix || rest.back() != '"' || rest.size() < prefix.size() + 1) {
                throw SourceError(Errc::SyntaxError, line_no, colon + 2, "expected format=\"<fmt>\"");
            }
            col.datetime_format = std::string(rest.substr(prefix.size(), rest.size() - prefix.size() - 1));
        }
        columns.push_back(std::move(col));
    }
    return Schema(std::move(columns));
}

Schema load_schema(const std::filesystem::path& path) {
    return parse_schema(read_file(path));
}

std::string schema_to_text(const Schema& schema) {
    std::string out;
    for (const Column& c : schema.columns()) {
        out += c.name + ": " + std::string(kind_name(c.kind));
        if (c.datetime_format) out += " format=\"" + *c.datetime_format + "\"";
        out += '\n';
    }
    return out;
}

// ─── table ───────────────────────────────────────────────────────────────

Table::Table(Schema schema, std::vector<Row> rows) : schema_(std::move(schema)) {
    rows_.reserve(rows.size());
    for (Row& r : rows) append(std::move(r));
}

void Table::check_cell(std::size_t column, const Value& value) const {
    if (is_null(value)) return;
    const ColumnKind kind = schema_.column(column).kind;
    const bool ok = (kind == ColumnKind::Integer && std::holds_alternative<std::int64_t>(value)) ||
                    (kind == ColumnKind::Real && std::holds_alternative<double>(value)) ||
                    (kind == ColumnKind::Categorical && std::holds_alternative<std::string>(value)) ||
                    (kind == ColumnKind::Datetime && std::holds_alternative<Timestamp>(value));
    if (!ok) {
        throw Error(Errc::SchemaMismatch, "cell does not match kind of column '" +
                                              schema_.column(column).name + "'");
    }
}

void Table::append(Row row) {
    if (row.size() != schema_.size()) {
        throw Error(Errc::SchemaMismatch, "row has " + std::to_string(row.size()) + " cells, expected " +
                                              std::to_string(schema_.size()));
    }
    for (std::size_t c = 0; c < row.size(); ++c) check_cell(c, row[c]);
    rows_.push_back(std::move(row));
}

void Table::set_cell(std::size_t row, std::size_t column, Value value) {
    check_cell(column, value);
    rows_.at(row).at(column) = std::move(value);
}

std::vector<Value> Table::column(std::size_t index) const {
    if (index >= schema_.size()) throw Error(Errc::UnknownColumn, "column index out of range");
    std::vector<Value> out;
    out.reserve(rows_.size());
    for (const Row& r : rows_) out.push_back(r[index]);
    return out;
}

std::vector<Value> Table::column(std::string_view name) const {
    return column(schema_.require(name));
}

Table Table::select(std::span<const std::size_t> indices) const {
    Table out(schema_);
    out.rows_.reserve(indices.size());
    for (std::size_t i : indices) out.rows_.push_back(rows_.at(i));
    return out;
}

// ─── CSV ─────────────────────────────────────────────────────────────────

bool read_csv_record(std::istream& in, std::vector<std::string>& fields, std::vector<bool>& quoted,
                     const CsvOptions& options) {
    fields.clear();
    quoted.clear();
    if (in.peek() == std::char_traits<char>::eof()) return false;

    std::string field;
    bool in_quotes = false;
    bool was_quoted = false;
    for (;;) {
        const int ch = in.get();
        if (ch == std::char_traits<char>::eof()) {
            if (in_quotes) throw Error(Errc::ParseError, "unterminated quoted field at end of input");
            break;
        }
        const char c = static_cast<char>(ch);
        if (in_quotes) {
            if (c == options.quote) {
                if (in.peek() == options.quote) {
                    field += options.quote;
                    in.get();
                } else {
                    in_quotes = false;
                }
            } else {
                field += c;
            }
        } else if (c == options.quote && field.empty() && !was_quoted) {
            in_quotes = true;
            was_quoted = true;
        } else if (c == options.delimiter) {
            fields.push_back(std::move(field));
            quoted.push_back(was_quoted);
            field.clear();
            was_quoted = false;
        } else if (c == '\n') {
            break;
        } else if (c == '\r') {
            if (in.peek() == '\n') in.get();
            break;
        } else {
            field += c;
        }
    }
    fields.push_back(std::move(field));
    quoted.push_back(was_quoted);
    return true;
}

namespace {

Value parse_cell(const std::string& raw, bool quoted, const Column& col, const CsvOptions& options,
                 std::size_t row) {
    if (!quoted) {
        for (const std::string& tok : options.null_tokens) {
            if (raw == tok) return Null{};
        }
    }
    try {
        switch (col.kind) {
            case ColumnKind::Categorical:
                return raw;
            case ColumnKind::Integer: {
                const std::string_view t = trim(raw);
                std::int64_t v = 0;
                const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
                if (ec != std::errc{} || ptr != t.data() + t.size() || t.empty()) {
                    throw CellParseError(row, col.name, raw, "not an integer");
                }
                return v;
            }
            case ColumnKind::Real: {
                std::string_view t = trim(raw);
                if (!t.empty() && t.front() == '+') t.remove_prefix(1);
                double v = 0;
                const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
                if (ec != std::errc{} || ptr != t.data() + t.size() || t.empty() || !std::isfinite(v)) {
                    throw CellParseError(row, col.name, raw, "not a finite real");
                }
                return v;
            }
            case ColumnKind::Datetime:
                return parse_datetime(raw, *col.datetime_format);
        }
    } catch (const CellParseError&) {
        if (options.lenient) return Null{};
        throw;
    } catch (const Error& e) {
        if (options.lenient) return Null{};
        throw CellParseError(row, col.name, raw, e.what());
    }
    return Null{};
}

}  // namespace

Table read_table(std::istream& in, const Schema& schema, const CsvOptions& options) {
    std::vector<std::string> fields;
    std::vector<bool> quoted;
    if (!read_csv_record(in, fields, quoted, options)) {
        throw Error(Errc::HeaderMismatch, "missing header row");
    }
    // Strip a UTF-8 byte order mark from the first header.
    if (!fields.empty() && fields[0].rfind("\xEF\xBB\xBF", 0) == 0) fields[0].erase(0, 3);

    std::vector<std::size_t> file_to_schema(fields.size());
    std::unordered_set<std::string> seen;
    for (std::size_t i = 0; i < fields.size(); ++i) {
        const std::string name(trim(fields[i]));
        if (!seen.insert(name).second) {
            throw Error(Errc::DuplicateHeader, "header '" + name + "' appears more than once");
        }
        const auto idx = schema.index_of(name);
        if (!idx) {
            throw Error(Errc::HeaderMismatch, "unexpected header '" + name + "'");
        }
        file_to_schema[i] = *idx;
    }
    if (fields.size() != schema.size()) {
        std::string missing;
        for (const Column& c : schema.columns()) {
            if (!seen.count(c.name)) missing += (missing.empty() ? "" : ", ") + c.name;
        }
        throw Error(Errc::HeaderMismatch, "header lacks schema columns: " + missing);
    }

    Table table(schema);
    std::size_t row = 0;
    while (read_csv_record(in, fields, quoted, options)) {
        ++row;
        if (fields.size() == 1 && fields[0].empty() && !quoted[0] && schema.size() != 1) continue;
        if (fields.size() != schema.size()) {
            throw CellParseError(row, "*", std::to_string(fields.size()) + " fields",
                                 "expected " + std::to_string(schema.size()) + " fields");
        }
        Row cells(schema.size());
        for (std::size_t i = 0; i < fields.size(); ++i) {
            const std::size_t c = file_to_schema[i];
            cells[c] = parse_cell(fields[i], quoted[i], schema.column(c), options, row);
        }
        table.append(std::move(cells));
    }
    return table;
}

Table load_table(const std::filesystem::path& path, const Schema& schema, const CsvOptions& options) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(Errc::FileNotFound, path.string());
    return read_table(in, schema, options);
}

namespace {

void write_field(std::ostream& out, const std::string& text, bool force_quote, const CsvOptions& options) {
    const bool needs = force_quote || text.find(options.delimiter) != std::string::npos ||
                       text.find(options.quote) != std::string::npos ||
                       text.find_first_of("\r\n") != std::string::npos ||
                       (!text.empty() && (std::isspace(static_cast<unsigned char>(text.front())) ||
                                          std::isspace(static_cast<unsigned char>(text.back()))));
    if (!needs) {
        out << text;
        return;
    }
    out << options.quote;
    for (char c : text) {
        if (c == options.quote) out << options.quote;
        out << c;
    }
    out << options.quote;
}

}  // namespace

void write_table(std::ostream& out, const Table& table, const CsvOptions& options) {
    const Schema& schema = table.schema();
    for (std::size_t c = 0; c < schema.size(); ++c) {
        if (c) out << options.delimiter;
        write_field(out, schema.column(c).name, false, options);
    }
    out << '\n';
    for (const Row& row : table.rows()) {
        for (std::size_t c = 0; c < row.size(); ++c) {
            if (c) out << options.delimiter;
            const Value& v = row[c];
            if (is_null(v)) continue;
            if (const auto* s = std::get_if<std::string>(&v)) {
                // A categorical that looks like a null token must be quoted to survive a reload.
                const bool collides = std::find(options.null_tokens.begin(), options.null_tokens.end(),
                                                *s) != options.null_tokens.end();
                write_field(out, *s, collides, options);
            } else if (const auto* t = std::get_if<Timestamp>(&v)) {
                write_field(out, format_datetime(*t, *schema.column(c).datetime_format), false, options);
            } else {
                out << display(v);
            }
        }
        out << '\n';
    }
}

void save_table(const std::filesystem::path& path, const Table& table, const CsvOptions& options) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(Errc::IoError, "cannot open '" + path.string() + "' for writing");
    write_table(out, table, options);
    if (!out) throw Error(Errc::IoError, "write to '" + path.string() + "' failed");
}

}  // namespace tabcheck
