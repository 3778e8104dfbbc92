#include "tabcheck/dependency.hpp"

#include "tabcheck/error.hpp"
#include "tabcheck/parallel.hpp"

namespace tabcheck {

MdiResult mdi(const Table& syn, const std::vector<DependencyRule>& rules, std::size_t violation_cap) {
    if (rules.empty()) throw Error(Errc::InvalidArgument, "at least one dependency rule is required");
    const std::size_t m = syn.row_count();
    if (m == 0) throw Error(Errc::EmptyTable, "synthetic table has no rows");

    // Rebind every expression to the synthetic table's column positions.
    std::vector<Expr> bound;
    std::vector<std::vector<std::size_t>> witness_columns;
    for (const DependencyRule& rule : rules) {
        Expr e = rule.expr;
        try {
            type_check(e, syn.schema());
        } catch (const Error& err) {
            throw Error(Errc::SchemaMismatch, "rule '" + rule.name + "': " + err.what());
        }
        bound.push_back(std::move(e));
        std::vector<std::size_t> cols;
        for (const std::string& c : referenced_columns(rule.expr)) cols.push_back(syn.schema().require(c));
        witness_columns.push_back(std::move(cols));
    }

    std::vector<std::vector<Truth>> verdict(rules.size(), std::vector<Truth>(m, Truth::Undetermined));
    parallel_for(m, [&](std::size_t begin, std::size_t end) {
        for (std::size_t j = begin; j < end; ++j) {
            const auto row = syn.row(j);
            for (std::size_t g = 0; g < rules.size(); ++g) {
                verdict[g][j] = eval_expr(bound[g], row, rules[g].tolerance);
            }
        }
    });

    MdiResult result;
    std::size_t total = 0;
    for (std::size_t g = 0; g < rules.size(); ++g) {
        RuleScore rs;
        rs.row_count = m;
        std::size_t sampled = 0;
        for (std::size_t j = 0; j < m; ++j) {
            const Truth t = verdict[g][j];
            if (t == Truth::True) {
                ++rs.satisfied_count;
                continue;
            }
            if (t == Truth::Undetermined) ++rs.undetermined_count;
            if (sampled < violation_cap) {
                ++sampled;
                RuleViolation v{j, rules[g].name, t, {}};
                for (std::size_t c : witness_columns[g]) {
                    const Column& col = syn.schema().column(c);
                    v.witnessed.emplace_back(col.name, col.datetime_format
                                                           ? display(syn.cell(j, c), *col.datetime_format)
                                                           : display(syn.cell(j, c)));
                }
                result.violations.push_back(std::move(v));
            }
        }
        rs.score = 100.0 * static_cast<double>(rs.satisfied_count) / static_cast<double>(m);
        total += rs.satisfied_count;
        result.per_rule[rules[g].name] = rs;
    }
    result.overall = 100.0 * static_cast<double>(total) / static_cast<double>(m * rules.size());
    return result;
}

}  // namespace tabcheck
