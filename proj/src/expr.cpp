#include "tabcheck/expr.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <optional>

#include "tabcheck/error.hpp"
#include "text_util.hpp"

namespace tabcheck {

std::string_view type_name(ExprType type) {
    switch (type) {
        case ExprType::Number: return "number";
        case ExprType::Datetime: return "datetime";
        case ExprType::Boolean: return "boolean";
    }
    return "?";
}

std::string_view truth_name(Truth t) {
    switch (t) {
        case Truth::False: return "false";
        case Truth::True: return "true";
        case Truth::Undetermined: return "undetermined";
    }
    return "?";
}

Expr Expr::make_number(double value) {
    Expr e;
    e.op = ExprOp::Number;
    e.number = value;
    return e;
}

Expr Expr::make_column(std::string name) {
    Expr e;
    e.op = ExprOp::Column;
    e.text = std::move(name);
    return e;
}

Expr Expr::make_date(std::string raw) {
    Expr e;
    e.op = ExprOp::DateLit;
    e.text = std::move(raw);
    return e;
}

Expr Expr::make_unary(ExprOp op, Expr operand) {
    Expr e;
    e.op = op;
    e.args.push_back(std::move(operand));
    return e;
}

Expr Expr::make_binary(ExprOp op, Expr lhs, Expr rhs) {
    Expr e;
    e.op = op;
    e.args.push_back(std::move(lhs));
    e.args.push_back(std::move(rhs));
    return e;
}

bool Expr::operator==(const Expr& other) const {
    return op == other.op && number == other.number && text == other.text && args == other.args;
}

namespace {

// ─── lexer ───────────────────────────────────────────────────────────────

enum class Tok {
    End,
    Number,
    Ident,
    String,
    LParen,
    RParen,
    Plus,
    Minus,
    Star,
    Slash,
    Lt,
    Le,
    Gt,
    Ge,
    EqEq,
    NotEq,
    Approx,
};

struct Token {
    Tok kind = Tok::End;
    std::string text;
    double number = 0;
    SourceLoc loc;
};

class Lexer {
public:
    Lexer(std::string_view src, SourceLoc origin) : src_(src), line_(origin.line), col_(origin.column) {}

    Token next() {
        skip_space();
        Token t;
        t.loc = {line_, col_};
        if (pos_ >= src_.size()) return t;
        const char c = src_[pos_];
        if (std::isdigit(static_cast<unsigned char>(c)) ||
            (c == '.' && pos_ + 1 < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_ + 1])))) {
            return lex_number(t);
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            const std::size_t start = pos_;
            while (pos_ < src_.size() &&
                   (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_')) {
                advance();
            }
            t.kind = Tok::Ident;
            t.text = std::string(src_.substr(start, pos_ - start));
            return t;
        }
        if (c == '"') {
            advance();
            const std::size_t start = pos_;
            while (pos_ < src_.size() && src_[pos_] != '"' && src_[pos_] != '\n') advance();
            if (pos_ >= src_.size() || src_[pos_] != '"') {
                throw SourceError(Errc::SyntaxError, t.loc.line, t.loc.column, "unterminated string literal");
            }
            t.kind = Tok::String;
            t.text = std::string(src_.substr(start, pos_ - start));
            advance();
            return t;
        }
        auto two = [&](char second) { return pos_ + 1 < src_.size() && src_[pos_ + 1] == second; };
        auto emit = [&](Tok kind, int width) {
            t.kind = kind;
            for (int i = 0; i < width; ++i) advance();
            return t;
        };
        switch (c) {
            case '(': return emit(Tok::LParen, 1);
            case ')': return emit(Tok::RParen, 1);
            case '+': return emit(Tok::Plus, 1);
            case '-': return emit(Tok::Minus, 1);
            case '*': return emit(Tok::Star, 1);
            case '/': return emit(Tok::Slash, 1);
            case '<': return two('=') ? emit(Tok::Le, 2) : emit(Tok::Lt, 1);
            case '>': return two('=') ? emit(Tok::Ge, 2) : emit(Tok::Gt, 1);
            case '=':
                if (two('=')) return emit(Tok::EqEq, 2);
                break;
            case '!':
                if (two('=')) return emit(Tok::NotEq, 2);
                break;
            case '~':
                if (two('=')) return emit(Tok::Approx, 2);
                break;
            default:
                break;
        }
        throw SourceError(Errc::SyntaxError, t.loc.line, t.loc.column,
                          std::string("unexpected character '") + c + "'");
    }

private:
    void advance() {
        if (src_[pos_] == '\n') {
            ++line_;
            col_ = 1;
        } else {
            ++col_;
        }
        ++pos_;
    }

    void skip_space() {
        while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) advance();
    }

    bool digit_at(std::size_t p) const {
        return p < src_.size() && std::isdigit(static_cast<unsigned char>(src_[p]));
    }

    Token lex_number(Token t) {
        const std::size_t start = pos_;
        while (digit_at(pos_)) advance();
        if (pos_ < src_.size() && src_[pos_] == '.') {
            advance();
            while (digit_at(pos_)) advance();
        }
        if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
            std::size_t p = pos_ + 1;
            if (p < src_.size() && (src_[p] == '+' || src_[p] == '-')) ++p;
            if (digit_at(p)) {
                while (pos_ < p) advance();
                while (digit_at(pos_)) advance();
            }
        }
        const std::string_view lexeme = src_.substr(start, pos_ - start);
        const auto [ptr, ec] = std::from_chars(lexeme.data(), lexeme.data() + lexeme.size(), t.number);
        if (ec != std::errc{} || ptr != lexeme.data() + lexeme.size() || !std::isfinite(t.number)) {
            throw SourceError(Errc::SyntaxError, t.loc.line, t.loc.column,
                              "invalid number '" + std::string(lexeme) + "'");
        }
        t.kind = Tok::Number;
        t.text = std::string(lexeme);
        return t;
    }

    std::string_view src_;
    std::size_t pos_ = 0;
    std::size_t line_;
    std::size_t col_;
};

// ─── parser ──────────────────────────────────────────────────────────────

bool is_keyword(std::string_view s) { return s == "and" || s == "or" || s == "not"; }

class Parser {
public:
    Parser(std::string_view src, SourceLoc origin) : lexer_(src, origin) { cur_ = lexer_.next(); }

    Expr parse() {
        Expr e = parse_or();
        if (cur_.kind != Tok::End) fail("unexpected trailing input");
        return e;
    }

private:
    [[noreturn]] void fail(const std::string& what) const {
        std::string msg = what;
        if (cur_.kind == Tok::End) {
            msg += " at end of input";
        } else {
            msg += " near '" + (cur_.text.empty() ? describe(cur_.kind) : cur_.text) + "'";
        }
        throw SourceError(Errc::SyntaxError, cur_.loc.line, cur_.loc.column, msg);
    }

    static std::string describe(Tok k) {
        switch (k) {
            case Tok::LParen: return "(";
            case Tok::RParen: return ")";
            case Tok::Plus: return "+";
            case Tok::Minus: return "-";
            case Tok::Star: return "*";
            case Tok::Slash: return "/";
            case Tok::Lt: return "<";
            case Tok::Le: return "<=";
            case Tok::Gt: return ">";
            case Tok::Ge: return ">=";
            case Tok::EqEq: return "==";
            case Tok::NotEq: return "!=";
            case Tok::Approx: return "~=";
            default: return "token";
        }
    }

    Token take() {
        Token t = std::move(cur_);
        cur_ = lexer_.next();
        return t;
    }

    bool at_keyword(std::string_view kw) const { return cur_.kind == Tok::Ident && cur_.text == kw; }

    static Expr located(Expr e, SourceLoc loc) {
        e.loc = loc;
        return e;
    }

    Expr parse_or() {
        Expr lhs = parse_and();
        while (at_keyword("or")) {
            const SourceLoc loc = take().loc;
            lhs = located(Expr::make_binary(ExprOp::Or, std::move(lhs), parse_and()), loc);
        }
        return lhs;
    }

    Expr parse_and() {
        Expr lhs = parse_not();
        while (at_keyword("and")) {
            const SourceLoc loc = take().loc;
            lhs = located(Expr::make_binary(ExprOp::And, std::move(lhs), parse_not()), loc);
        }
        return lhs;
    }

    Expr parse_not() {
        if (at_keyword("not")) {
            const SourceLoc loc = take().loc;
            return located(Expr::make_unary(ExprOp::Not, parse_not()), loc);
        }
        return parse_comparison();
    }

    static std::optional<ExprOp> comparison_op(Tok k) {
        switch (k) {
            case Tok::Lt: return ExprOp::Lt;
            case Tok::Le: return ExprOp::Le;
            case Tok::Gt: return ExprOp::Gt;
            case Tok::Ge: return ExprOp::Ge;
            case Tok::EqEq: return ExprOp::Eq;
            case Tok::NotEq: return ExprOp::Ne;
            case Tok::Approx: return ExprOp::Approx;
            default: return std::nullopt;
        }
    }

    Expr parse_comparison() {
        Expr lhs = parse_additive();
        if (const auto op = comparison_op(cur_.kind)) {
            const SourceLoc loc = take().loc;
            lhs = located(Expr::make_binary(*op, std::move(lhs), parse_additive()), loc);
            if (comparison_op(cur_.kind)) fail("comparisons do not chain; add parentheses");
        }
        return lhs;
    }

    Expr parse_additive() {
        Expr lhs = parse_multiplicative();
        while (cur_.kind == Tok::Plus || cur_.kind == Tok::Minus) {
            const ExprOp op = cur_.kind == Tok::Plus ? ExprOp::Add : ExprOp::Sub;
            const SourceLoc loc = take().loc;
            lhs = located(Expr::make_binary(op, std::move(lhs), parse_multiplicative()), loc);
        }
        return lhs;
    }

    Expr parse_multiplicative() {
        Expr lhs = parse_unary();
        while (cur_.kind == Tok::Star || cur_.kind == Tok::Slash) {
            const ExprOp op = cur_.kind == Tok::Star ? ExprOp::Mul : ExprOp::Div;
            const SourceLoc loc = take().loc;
            lhs = located(Expr::make_binary(op, std::move(lhs), parse_unary()), loc);
        }
        return lhs;
    }

    Expr parse_unary() {
        if (cur_.kind == Tok::Minus) {
            const SourceLoc loc = take().loc;
            return located(Expr::make_unary(ExprOp::Neg, parse_unary()), loc);
        }
        return parse_primary();
    }

    Expr parse_primary() {
        switch (cur_.kind) {
            case Tok::Number: {
                const Token t = take();
                return located(Expr::make_number(t.number), t.loc);
            }
            case Tok::String: {
                Token t = take();
                return located(Expr::make_date(std::move(t.text)), t.loc);
            }
            case Tok::LParen: {
                take();
                Expr inner = parse_or();
                if (cur_.kind != Tok::RParen) fail("expected ')'");
                take();
                return inner;
            }
            case Tok::Ident: {
                if (is_keyword(cur_.text)) fail("expected an operand");
                Token t = take();
                if (cur_.kind == Tok::LParen && (t.text == "abs" || t.text == "date")) {
                    take();
                    Expr arg = parse_or();
                    if (cur_.kind != Tok::RParen) fail("expected ')'");
                    take();
                    const ExprOp op = t.text == "abs" ? ExprOp::Abs : ExprOp::Date;
                    return located(Expr::make_unary(op, std::move(arg)), t.loc);
                }
                return located(Expr::make_column(std::move(t.text)), t.loc);
            }
            default:
                fail("expected an operand");
        }
    }

    Lexer lexer_;
    Token cur_;
};

// ─── printer ─────────────────────────────────────────────────────────────

int precedence(ExprOp op) {
    switch (op) {
        case ExprOp::Or: return 1;
        case ExprOp::And: return 2;
        case ExprOp::Not: return 3;
        case ExprOp::Lt:
        case ExprOp::Le:
        case ExprOp::Gt:
        case ExprOp::Ge:
        case ExprOp::Eq:
        case ExprOp::Ne:
        case ExprOp::Approx: return 4;
        case ExprOp::Add:
        case ExprOp::Sub: return 5;
        case ExprOp::Mul:
        case ExprOp::Div: return 6;
        case ExprOp::Neg: return 7;
        default: return 8;
    }
}

std::string_view symbol(ExprOp op) {
    switch (op) {
        case ExprOp::Add: return "+";
        case ExprOp::Sub: return "-";
        case ExprOp::Mul: return "*";
        case ExprOp::Div: return "/";
        case ExprOp::Lt: return "<";
        case ExprOp::Le: return "<=";
        case ExprOp::Gt: return ">";
        case ExprOp::Ge: return ">=";
        case ExprOp::Eq: return "==";
        case ExprOp::Ne: return "!=";
        case ExprOp::Approx: return "~=";
        case ExprOp::And: return "and";
        case ExprOp::Or: return "or";
        default: return "?";
    }
}

void print(const Expr& e, std::string& out);

void print_child(const Expr& child, bool parenthesize, std::string& out) {
    if (parenthesize) out += '(';
    print(child, out);
    if (parenthesize) out += ')';
}

void print(const Expr& e, std::string& out) {
    const int prec = precedence(e.op);
    switch (e.op) {
        case ExprOp::Number:
            out += format_real(e.number);
            return;
        case ExprOp::DateLit:
            out += '"';
            out += e.text;
            out += '"';
            return;
        case ExprOp::Column:
            out += e.text;
            return;
        case ExprOp::Abs:
        case ExprOp::Date:
            out += e.op == ExprOp::Abs ? "abs(" : "date(";
            print(e.args[0], out);
            out += ')';
            return;
        case ExprOp::Neg:
            out += '-';
            print_child(e.args[0], precedence(e.args[0].op) < prec, out);
            return;
        case ExprOp::Not:
            out += "not ";
            print_child(e.args[0], precedence(e.args[0].op) < prec, out);
            return;
        default:
            break;
    }
    // Binary. Comparisons are non-associative, so a comparison child on
    // either side needs parentheses; the arithmetic and logical operators
    // associate to the left.
    print_child(e.args[0], precedence(e.args[0].op) < prec || (prec == 4 && precedence(e.args[0].op) == 4),
                out);
    out += ' ';
    out += symbol(e.op);
    out += ' ';
    print_child(e.args[1], precedence(e.args[1].op) <= prec, out);
}

// ─── type checking ───────────────────────────────────────────────────────

[[noreturn]] void type_error(const Expr& e, std::string_view expected, ExprType found) {
    throw SourceError(Errc::TypeError, e.loc.line, e.loc.column,
                      "expected " + std::string(expected) + ", found " + std::string(type_name(found)));
}

const Expr* first_datetime_column(const Expr& e, const Schema& schema) {
    if (e.op == ExprOp::Column) {
        const auto idx = schema.index_of(e.text);
        if (idx && schema.column(*idx).kind == ColumnKind::Datetime) return &e;
        return nullptr;
    }
    for (const Expr& a : e.args) {
        if (const Expr* found = first_datetime_column(a, schema)) return found;
    }
    return nullptr;
}

std::optional<std::string> fallback_datetime_format(const Schema& schema) {
    for (const Column& c : schema.columns()) {
        if (c.kind == ColumnKind::Datetime) return c.datetime_format;
    }
    return std::nullopt;
}

ExprType check(Expr& e, const Schema& schema, const std::optional<std::string>& date_format) {
    auto expect = [&](Expr& child, ExprType want) {
        const ExprType got = check(child, schema, date_format);
        if (got != want) type_error(child, type_name(want), got);
    };
    switch (e.op) {
        case ExprOp::Number:
            return ExprType::Number;
        case ExprOp::DateLit: {
            const auto fmt = date_format ? date_format : fallback_datetime_format(schema);
            if (!fmt) {
                throw SourceError(Errc::TypeError, e.loc.line, e.loc.column,
                                  "datetime literal but the schema has no datetime column");
            }
            try {
                e.literal_time = parse_datetime(e.text, *fmt);
            } catch (const Error& err) {
                throw SourceError(Errc::TypeError, e.loc.line, e.loc.column,
                                  "datetime literal \"" + e.text + "\" does not match format \"" + *fmt + "\"");
            }
            return ExprType::Datetime;
        }
        case ExprOp::Column: {
            const auto idx = schema.index_of(e.text);
            if (!idx) {
                throw SourceError(Errc::UnknownColumn, e.loc.line, e.loc.column,
                                  "unknown column '" + e.text + "'");
            }
            e.column_index = *idx;
            switch (schema.column(*idx).kind) {
                case ColumnKind::Integer:
                case ColumnKind::Real: return ExprType::Number;
                case ColumnKind::Datetime: return ExprType::Datetime;
                case ColumnKind::Categorical:
                    throw SourceError(Errc::TypeError, e.loc.line, e.loc.column,
                                      "expected number or datetime, found categorical column '" + e.text + "'");
            }
            return ExprType::Number;
        }
        case ExprOp::Neg:
        case ExprOp::Abs:
            expect(e.args[0], ExprType::Number);
            return ExprType::Number;
        case ExprOp::Date:
            expect(e.args[0], ExprType::Datetime);
            return ExprType::Datetime;
        case ExprOp::Add:
        case ExprOp::Sub:
        case ExprOp::Mul:
        case ExprOp::Div:
        case ExprOp::Approx:
            expect(e.args[0], ExprType::Number);
            expect(e.args[1], ExprType::Number);
            return e.op == ExprOp::Approx ? ExprType::Boolean : ExprType::Number;
        case ExprOp::Lt:
        case ExprOp::Le:
        case ExprOp::Gt:
        case ExprOp::Ge:
        case ExprOp::Eq:
        case ExprOp::Ne: {
            // Literals on either side take the format of the first datetime
            // column in the comparison.
            std::optional<std::string> fmt = date_format;
            if (const Expr* col = first_datetime_column(e, schema)) {
                fmt = schema.column(*schema.index_of(col->text)).datetime_format;
            }
            const ExprType lhs = check(e.args[0], schema, fmt);
            if (lhs == ExprType::Boolean) type_error(e.args[0], "number or datetime", lhs);
            const ExprType rhs = check(e.args[1], schema, fmt);
            if (rhs != lhs) type_error(e.args[1], type_name(lhs), rhs);
            return ExprType::Boolean;
        }
        case ExprOp::Not:
            expect(e.args[0], ExprType::Boolean);
            return ExprType::Boolean;
        case ExprOp::And:
        case ExprOp::Or:
            expect(e.args[0], ExprType::Boolean);
            expect(e.args[1], ExprType::Boolean);
            return ExprType::Boolean;
    }
    return ExprType::Boolean;
}

void collect_columns(const Expr& e, std::vector<std::string>& out) {
    if (e.op == ExprOp::Column) {
        for (const std::string& s : out) {
            if (s == e.text) return;
        }
        out.push_back(e.text);
        return;
    }
    for (const Expr& a : e.args) collect_columns(a, out);
}

// ─── evaluation ──────────────────────────────────────────────────────────

struct Scalar {
    enum class Kind { Number, Time, Bool, Undetermined } kind = Kind::Undetermined;
    double number = 0;
    std::int64_t time = 0;
    bool truth = false;

    static Scalar num(double v) {
        if (std::isnan(v)) return {};
        return {Kind::Number, v, 0, false};
    }
    static Scalar at(std::int64_t t) { return {Kind::Time, 0, t, false}; }
    static Scalar boolean(bool b) { return {Kind::Bool, 0, 0, b}; }
    bool undetermined() const { return kind == Kind::Undetermined; }
};

Scalar evaluate(const Expr& e, std::span<const Value> row, double tolerance) {
    switch (e.op) {
        case ExprOp::Number:
            return Scalar::num(e.number);
        case ExprOp::DateLit:
            return Scalar::at(e.literal_time.micros);
        case ExprOp::Column: {
            const Value& v = row[e.column_index];
            if (const auto* t = std::get_if<Timestamp>(&v)) return Scalar::at(t->micros);
            if (const auto n = as_number(v)) return Scalar::num(*n);
            return {};
        }
        default:
            break;
    }

    // Every operand is evaluated so that any Null reference in the tree
    // yields Undetermined regardless of short-circuiting.
    const Scalar a = evaluate(e.args[0], row, tolerance);
    const Scalar b = e.args.size() > 1 ? evaluate(e.args[1], row, tolerance) : Scalar{};
    if (a.undetermined() || (e.args.size() > 1 && b.undetermined())) return {};

    auto compare = [&](auto pred) {
        if (a.kind == Scalar::Kind::Time) return Scalar::boolean(pred(a.time, b.time));
        return Scalar::boolean(pred(a.number, b.number));
    };

    switch (e.op) {
        case ExprOp::Neg: return Scalar::num(-a.number);
        case ExprOp::Abs: return Scalar::num(std::fabs(a.number));
        case ExprOp::Date: return Scalar::at(floor_to_day(Timestamp{a.time}).micros);
        case ExprOp::Add: return Scalar::num(a.number + b.number);
        case ExprOp::Sub: return Scalar::num(a.number - b.number);
        case ExprOp::Mul: return Scalar::num(a.number * b.number);
        case ExprOp::Div:
            if (b.number == 0.0) return {};
            return Scalar::num(a.number / b.number);
        case ExprOp::Lt: return compare([](auto x, auto y) { return x < y; });
        case ExprOp::Le: return compare([](auto x, auto y) { return x <= y; });
        case ExprOp::Gt: return compare([](auto x, auto y) { return x > y; });
        case ExprOp::Ge: return compare([](auto x, auto y) { return x >= y; });
        case ExprOp::Eq: return compare([](auto x, auto y) { return x == y; });
        case ExprOp::Ne: return compare([](auto x, auto y) { return x != y; });
        case ExprOp::Approx: return Scalar::boolean(std::fabs(a.number - b.number) <= tolerance);
        case ExprOp::Not: return Scalar::boolean(!a.truth);
        case ExprOp::And: return Scalar::boolean(a.truth && b.truth);
        case ExprOp::Or: return Scalar::boolean(a.truth || b.truth);
        default: return {};
    }
}

}  // namespace

Expr parse_expr(std::string_view text, SourceLoc origin) {
    return Parser(text, origin).parse();
}

std::string to_string(const Expr& expr) {
    std::string out;
    print(expr, out);
    return out;
}

ExprType type_check(Expr& expr, const Schema& schema) {
    return check(expr, schema, std::nullopt);
}

std::vector<std::string> referenced_columns(const Expr& expr) {
    std::vector<std::string> out;
    collect_columns(expr, out);
    return out;
}

Truth eval_expr(const Expr& expr, std::span<const Value> row, double tolerance) {
    const Scalar s = evaluate(expr, row, tolerance);
    if (s.kind != Scalar::Kind::Bool) return Truth::Undetermined;
    return s.truth ? Truth::True : Truth::False;
}

}  // namespace tabcheck
