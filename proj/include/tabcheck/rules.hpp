#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "tabcheck/expr.hpp"
#include "tabcheck/table.hpp"

namespace tabcheck {

inline constexpr double kDefaultTolerance = 0.01;

/// Valid tuples are the distinct complete tuples of the real table.
struct FromRealTable {
    bool operator==(const FromRealTable&) const = default;
};

/// Valid tuples come from a CSV file whose header names the group columns.
struct ExplicitTupleFile {
    std::filesystem::path path;
    bool operator==(const ExplicitTupleFile&) const = default;
};

using TupleReference = std::variant<FromRealTable, ExplicitTupleFile>;

/// Columns whose values must jointly form an admissible combination,
/// e.g. city / state / country / region / market.
struct ConsistencyGroup {
    std::string name;
    std::vector<std::string> columns;
    TupleReference reference;
};

/// Row-local Boolean condition over column values.
struct DependencyRule {
    std::string name;
    std::vector<std::string> group_columns;
    Expr expr;
    double tolerance = kDefaultTolerance;
};

struct RuleSet {
    std::vector<ConsistencyGroup> groups;
    std::vector<DependencyRule> rules;
};

/// Builds and validates a group: at least two distinct columns, all present
/// in the schema.
ConsistencyGroup make_group(std::string name, std::vector<std::string> columns, const Schema& schema,
                            TupleReference reference = FromRealTable{});

/// Parses and type-checks `expr_text`; the result must be Boolean. With no
/// explicit group columns the referenced columns are used.
DependencyRule make_rule(std::string name, std::string_view expr_text, const Schema& schema,
                         double tolerance = kDefaultTolerance, std::vector<std::string> group_columns = {});

/// Rule file: INI-like sections
///
///     [group geo]
///     columns = order_city, order_state, order_country
///     reference = real            # or file:<path>, relative to base_dir
///
///     [rule temporal]
///     expr = order_date < shipping_date
///     tolerance = 0.01
///
/// A key may follow the section header on the same line. Lines whose first
/// non-blank character is '#' or ';' are comments.
RuleSet parse_rules_text(std::string_view text, const Schema& schema,
                         const std::filesystem::path& base_dir = {});
RuleSet parse_rules(const std::filesystem::path& path, const Schema& schema);

}  // namespace tabcheck
