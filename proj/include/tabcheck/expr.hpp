#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tabcheck/table.hpp"

namespace tabcheck {

struct SourceLoc {
    std::size_t line = 1;
    std::size_t column = 1;
};

enum class ExprOp {
    Number,   // numeric literal
    DateLit,  // quoted datetime literal
    Column,   // column reference
    Neg,
    Abs,
    Date,  // date(e): datetime floored to midnight
    Add,
    Sub,
    Mul,
    Div,
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Ne,
    Approx,  // a ~= b  <=>  |a - b| <= tolerance
    Not,
    And,
    Or,
};

enum class ExprType { Number, Datetime, Boolean };

std::string_view type_name(ExprType type);

/// Row-local expression tree. Equality is structural: source locations and
/// the bindings filled in by type_check do not take part.
struct Expr {
    ExprOp op = ExprOp::Number;
    double number = 0.0;   // Number
    std::string text;      // Column name or DateLit raw text
    std::vector<Expr> args;
    SourceLoc loc;

    // Bindings set by type_check.
    static constexpr std::size_t kUnbound = std::numeric_limits<std::size_t>::max();
    std::size_t column_index = kUnbound;
    Timestamp literal_time;

    static Expr make_number(double value);
    static Expr make_column(std::string name);
    static Expr make_date(std::string raw);
    static Expr make_unary(ExprOp op, Expr operand);
    static Expr make_binary(ExprOp op, Expr lhs, Expr rhs);

    bool operator==(const Expr& other) const;
};

/// Parses a complete expression. Precedence from loosest to tightest:
/// or, and, not, comparisons (non-associative), + -, * /, unary minus.
/// `origin` is the position of the first character, for error reporting.
/// Throws SourceError{SyntaxError}.
Expr parse_expr(std::string_view text, SourceLoc origin = {});

/// Inverse of parse_expr: emits the minimum parentheses needed for the
/// printed text to reparse to an equal tree.
std::string to_string(const Expr& expr);

/// Resolves column references and datetime literals against `schema` and
/// returns the expression's type. Throws SourceError{UnknownColumn} or
/// SourceError{TypeError}.
ExprType type_check(Expr& expr, const Schema& schema);

/// Column names referenced by the expression, in order of first appearance.
std::vector<std::string> referenced_columns(const Expr& expr);

enum class Truth { False, True, Undetermined };

std::string_view truth_name(Truth t);

/// Evaluates a type-checked Boolean expression on one row. A Null cell or a
/// division by zero anywhere in the tree makes the result Undetermined.
Truth eval_expr(const Expr& expr, std::span<const Value> row, double tolerance);

}  // namespace tabcheck
