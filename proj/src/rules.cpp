#include "tabcheck/rules.hpp"

#include <charconv>
#include <cmath>
#include <optional>
#include <set>

#include "tabcheck/error.hpp"
#include "text_util.hpp"

namespace tabcheck {

ConsistencyGroup make_group(std::string name, std::vector<std::string> columns, const Schema& schema,
                            TupleReference reference) {
    if (columns.size() < 2) {
        throw Error(Errc::InvalidArgument, "group '" + name + "' needs at least two columns");
    }
    std::set<std::string> seen;
    for (const std::string& c : columns) {
        schema.require(c);
        if (!seen.insert(c).second) {
            throw Error(Errc::InvalidArgument, "group '" + name + "' lists column '" + c + "' twice");
        }
    }
    return ConsistencyGroup{std::move(name), std::move(columns), std::move(reference)};
}

DependencyRule make_rule(std::string name, std::string_view expr_text, const Schema& schema, double tolerance,
                         std::vector<std::string> group_columns) {
    if (!(tolerance >= 0.0) || !std::isfinite(tolerance)) {
        throw Error(Errc::InvalidArgument, "rule '" + name + "': tolerance must be a nonnegative number");
    }
    Expr expr = parse_expr(expr_text);
    const ExprType type = type_check(expr, schema);
    if (type != ExprType::Boolean) {
        throw SourceError(Errc::TypeError, expr.loc.line, expr.loc.column,
                          "expected boolean, found " + std::string(type_name(type)));
    }
    if (group_columns.empty()) {
        group_columns = referenced_columns(expr);
    } else {
        for (const std::string& c : group_columns) schema.require(c);
    }
    return DependencyRule{std::move(name), std::move(group_columns), std::move(expr), tolerance};
}

namespace {

enum class SectionKind { Group, Rule };

struct Entry {
    std::string value;
    SourceLoc loc;  // position of the value's first character
};

struct Section {
    SectionKind kind = SectionKind::Group;
    std::string name;
    SourceLoc loc;
    std::optional<Entry> columns;
    std::optional<Entry> expr;
    std::optional<Entry> tolerance;
    std::optional<Entry> reference;
};

[[noreturn]] void syntax(SourceLoc loc, const std::string& msg) {
    throw SourceError(Errc::SyntaxError, loc.line, loc.column, msg);
}

// Offset of `part` inside `whole`, both views of the same buffer.
std::size_t offset_in(std::string_view whole, std::string_view part) {
    return static_cast<std::size_t>(part.data() - whole.data());
}

void parse_key_value(std::string_view line, std::string_view kv, std::size_t line_no, Section& section) {
    const SourceLoc key_loc{line_no, offset_in(line, kv) + 1};
    const auto eq = kv.find('=');
    if (eq == std::string_view::npos) syntax(key_loc, "expected '<key> = <value>'");
    const std::string_view key = trim(kv.substr(0, eq));
    const std::string_view value = trim(kv.substr(eq + 1));
    Entry entry{std::string(value), {line_no, offset_in(line, value) + 1}};
    if (value.empty()) entry.loc.column = offset_in(line, kv) + eq + 2;

    std::optional<Entry>* slot = nullptr;
    if (key == "columns") {
        slot = &section.columns;
    } else if (key == "expr" && section.kind == SectionKind::Rule) {
        slot = &section.expr;
    } else if (key == "tolerance" && section.kind == SectionKind::Rule) {
        slot = &section.tolerance;
    } else if (key == "reference" && section.kind == SectionKind::Group) {
        slot = &section.reference;
    } else {
        syntax(key_loc, "unknown key '" + std::string(key) + "' in " +
                            (section.kind == SectionKind::Group ? "group" : "rule") + " section");
    }
    if (slot->has_value()) syntax(key_loc, "duplicate key '" + std::string(key) + "'");
    *slot = std::move(entry);
}

std::vector<std::string> parse_column_list(const Entry& e, const Schema& schema) {
    std::vector<std::string> out;
    std::size_t start = 0;
    const std::string_view v = e.value;
    while (true) {
        const std::size_t end = v.find(',', start);
        const std::string_view raw = v.substr(start, end == std::string_view::npos ? end : end - start);
        const std::string_view name = trim(raw);
        const SourceLoc loc{e.loc.line, e.loc.column + offset_in(v, name)};
        if (!is_identifier(name)) syntax(loc, "invalid column name '" + std::string(name) + "'");
        if (!schema.index_of(name)) {
            throw SourceError(Errc::UnknownColumn, loc.line, loc.column, "unknown column '" + std::string(name) + "'");
        }
        out.emplace_back(name);
        if (end == std::string_view::npos) break;
        start = end + 1;
    }
    return out;
}

ConsistencyGroup build_group(const Section& s, const Schema& schema, const std::filesystem::path& base_dir) {
    if (!s.columns) syntax(s.loc, "group '" + s.name + "' has no 'columns' key");
    std::vector<std::string> columns = parse_column_list(*s.columns, schema);
    TupleReference reference = FromRealTable{};
    if (s.reference) {
        const std::string& r = s.reference->value;
        if (r == "real") {
            reference = FromRealTable{};
        } else if (r.rfind("file:", 0) == 0 && r.size() > 5) {
            std::filesystem::path p = std::string(trim(std::string_view(r).substr(5)));
            if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
            reference = ExplicitTupleFile{p};
        } else {
            syntax(s.reference->loc, "reference must be 'real' or 'file:<path>'");
        }
    }
    try {
        return make_group(s.name, std::move(columns), schema, std::move(reference));
    } catch (const SourceError&) {
        throw;
    } catch (const Error& e) {
        syntax(s.columns->loc, e.what());
    }
}

DependencyRule build_rule(const Section& s, const Schema& schema) {
    if (!s.expr) syntax(s.loc, "rule '" + s.name + "' has no 'expr' key");
    double tolerance = kDefaultTolerance;
    if (s.tolerance) {
        const std::string& t = s.tolerance->value;
        const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), tolerance);
        if (ec != std::errc{} || ptr != t.data() + t.size() || !(tolerance >= 0) || !std::isfinite(tolerance)) {
            syntax(s.tolerance->loc, "tolerance must be a nonnegative number");
        }
    }
    std::vector<std::string> group_columns;
    if (s.columns) group_columns = parse_column_list(*s.columns, schema);

    Expr expr = parse_expr(s.expr->value, s.expr->loc);
    const ExprType type = type_check(expr, schema);
    if (type != ExprType::Boolean) {
        throw SourceError(Errc::TypeError, s.expr->loc.line, s.expr->loc.column,
                          "rule expression: expected boolean, found " + std::string(type_name(type)));
    }
    if (group_columns.empty()) group_columns = referenced_columns(expr);
    return DependencyRule{s.name, std::move(group_columns), std::move(expr), tolerance};
}

}  // namespace

RuleSet parse_rules_text(std::string_view text, const Schema& schema, const std::filesystem::path& base_dir) {
    std::vector<Section> sections;
    std::size_t line_no = 0;
    for (std::string_view line : split_lines(text)) {
        ++line_no;
        const std::string_view stripped = trim(line);
        if (stripped.empty() || stripped.front() == '#' || stripped.front() == ';') continue;
        if (stripped.front() == '[') {
            const SourceLoc loc{line_no, offset_in(line, stripped) + 1};
            const auto close = stripped.find(']');
            if (close == std::string_view::npos) syntax(loc, "unterminated section header");
            const std::string_view header = trim(stripped.substr(1, close - 1));
            const auto space = header.find_first_of(" \t");
            const std::string_view kind = header.substr(0, space);
            const std::string_view name =
                space == std::string_view::npos ? std::string_view{} : trim(header.substr(space));
            Section s;
            if (kind == "group") {
                s.kind = SectionKind::Group;
            } else if (kind == "rule") {
                s.kind = SectionKind::Rule;
            } else {
                syntax(loc, "section must be [group <name>] or [rule <name>]");
            }
            if (!is_identifier(name)) syntax(loc, "invalid section name '" + std::string(name) + "'");
            for (const Section& other : sections) {
                if (other.kind == s.kind && other.name == name) {
                    syntax(loc, "duplicate " + std::string(kind) + " name '" + std::string(name) + "'");
                }
            }
            s.name = std::string(name);
            s.loc = loc;
            sections.push_back(std::move(s));
            const std::string_view rest = trim(stripped.substr(close + 1));
            if (!rest.empty()) parse_key_value(line, rest, line_no, sections.back());
            continue;
        }
        if (sections.empty()) {
            syntax({line_no, offset_in(line, stripped) + 1}, "key outside of any section");
        }
        parse_key_value(line, stripped, line_no, sections.back());
    }

    RuleSet set;
    for (const Section& s : sections) {
        if (s.kind == SectionKind::Group) {
            set.groups.push_back(build_group(s, schema, base_dir));
        } else {
            set.rules.push_back(build_rule(s, schema));
        }
    }
    return set;
}

RuleSet parse_rules(const std::filesystem::path& path, const Schema& schema) {
    return parse_rules_text(read_file(path), schema, path.parent_path());
}

}  // namespace tabcheck
