#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <string>
#include <unordered_set>
#include <vector>

#include "tabcheck/rules.hpp"
#include "tabcheck/table.hpp"

namespace tabcheck {

using Tuple = std::vector<std::string>;

struct TupleHash {
    std::size_t operator()(const Tuple& t) const noexcept;
};

/// Admissible value combinations for one consistency group. Values are
/// stored trimmed; membership is exact, case-sensitive string equality.
class ValidTupleSet {
public:
    ValidTupleSet() = default;
    explicit ValidTupleSet(std::string group, std::size_t arity) : group_(std::move(group)), arity_(arity) {}

    /// Adds a tuple (trimmed). Returns false if it was already present.
    bool insert(Tuple tuple);
    bool contains(const Tuple& trimmed) const { return tuples_.count(trimmed) != 0; }

    const std::string& group() const noexcept { return group_; }
    std::size_t arity() const noexcept { return arity_; }
    std::size_t size() const noexcept { return tuples_.size(); }
    const std::unordered_set<Tuple, TupleHash>& tuples() const noexcept { return tuples_; }

private:
    std::string group_;
    std::size_t arity_ = 0;
    std::unordered_set<Tuple, TupleHash> tuples_;
};

/// Distinct complete tuples of `real` over the group's columns.
/// Throws NonCategoricalColumn, EmptyReference.
ValidTupleSet infer_valid_tuples(const Table& real, const ConsistencyGroup& group);

/// Reads a tuple CSV whose header contains every group column.
ValidTupleSet load_valid_tuples(const std::filesystem::path& path, const ConsistencyGroup& group);

/// Resolves the group's reference: an explicit file or inference from `real`.
ValidTupleSet resolve_valid_tuples(const Table& real, const ConsistencyGroup& group);

struct GroupScore {
    std::size_t valid_count = 0;
    std::size_t row_count = 0;
    double score = 0.0;  // 100 * valid_count / row_count
};

struct GroupViolation {
    std::size_t row = 0;
    std::string group;
    std::vector<std::string> tuple;  // "NA" marks a Null cell
};

struct HcsResult {
    double overall = 0.0;
    std::map<std::string, GroupScore> per_group;
    std::vector<GroupViolation> violations;  // at most violation_cap per group, by row order
};

inline constexpr std::size_t kViolationCap = 100;

/// Hierarchical consistency: share of (row, group) pairs whose complete
/// tuple belongs to the group's valid set, scaled to [0, 100].
/// Throws SchemaMismatch, EmptyTable, InvalidArgument.
HcsResult hcs(const Table& syn, const std::vector<ConsistencyGroup>& groups,
              const std::vector<ValidTupleSet>& valid, std::size_t violation_cap = kViolationCap);

}  // namespace tabcheck
