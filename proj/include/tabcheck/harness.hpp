#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "tabcheck/rules.hpp"
#include "tabcheck/table.hpp"

namespace tabcheck {

/// Writes "⊥<seed>-<row>" into the group's first column.
struct CorruptGroup {
    std::string group;
    double fraction = 0.0;
};

/// Edits one referenced cell per row so the rule evaluates False.
struct BreakRule {
    std::string rule;
    double fraction = 0.0;
};

/// Permutes the column's cells across all rows.
struct ShuffleColumn {
    std::string column;
};

/// Adds N(0, sigma^2) noise, in raw column units, to every non-Null cell
/// of the listed numeric columns. Integer columns are rounded.
struct GaussianNoise {
    std::vector<std::string> columns;
    double sigma = 0.0;
};

/// Swaps the two datetime cells referenced by the rule.
struct SwapDates {
    std::string rule;
    double fraction = 0.0;
};

using PerturbationKind = std::variant<CorruptGroup, BreakRule, ShuffleColumn, GaussianNoise, SwapDates>;

struct Perturbation {
    PerturbationKind kind;
    std::uint64_t seed = 0;
};

/// ceil(fraction * rows), ignoring floating-point noise in the product.
std::size_t affected_rows(double fraction, std::size_t rows);

/// `count` distinct indices from [0, n), seeded, in ascending order.
std::vector<std::size_t> sample_rows(std::size_t n, std::size_t count, std::uint64_t seed);

/// Applies the perturbation to a copy of `table`. Fractional kinds modify
/// exactly affected_rows(fraction, M) rows chosen by sample_rows.
/// Throws UnknownTarget, InvalidArgument.
Table perturb(const Table& table, const Perturbation& p, const RuleSet& rules = {});

/// SMOTE-style interpolation: each sample takes a uniformly drawn complete
/// base row, one of its k nearest complete rows (Euclidean distance on
/// standardized numeric columns), and interpolates numeric cells at a
/// uniform point of the segment. Categorical and datetime cells are copied
/// from the base row. Throws InsufficientRows.
Table smote_like(const Table& real, std::size_t n_samples, std::size_t k_neighbors, std::uint64_t seed);

/// splitmix64 finalizer; used to derive independent streams from one seed.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace tabcheck
