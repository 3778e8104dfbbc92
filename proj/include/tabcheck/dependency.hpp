#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "tabcheck/consistency.hpp"
#include "tabcheck/rules.hpp"
#include "tabcheck/table.hpp"

namespace tabcheck {

struct RuleScore {
    std::size_t satisfied_count = 0;
    std::size_t undetermined_count = 0;
    std::size_t row_count = 0;
    double score = 0.0;  // 100 * satisfied_count / row_count
};

struct RuleViolation {
    std::size_t row = 0;
    std::string rule;
    Truth verdict = Truth::False;
    std::vector<std::pair<std::string, std::string>> witnessed;  // column -> displayed value
};

struct MdiResult {
    double overall = 0.0;
    std::map<std::string, RuleScore> per_rule;
    std::vector<RuleViolation> violations;
};

/// Multivariate dependency: share of (row, rule) pairs whose rule evaluates
/// True. Undetermined counts as a violation; the denominator is always M*N.
/// Throws SchemaMismatch, EmptyTable, InvalidArgument.
MdiResult mdi(const Table& syn, const std::vector<DependencyRule>& rules,
              std::size_t violation_cap = kViolationCap);

}  // namespace tabcheck
