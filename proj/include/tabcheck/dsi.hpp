#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "tabcheck/gmm.hpp"
#include "tabcheck/table.hpp"

namespace tabcheck {

struct DsiOptions {
    /// Columns to model. Empty selects every integer and real column, plus
    /// categorical columns when encode_categorical is set. Datetime columns
    /// may be named explicitly and enter as ordinal values.
    std::vector<std::string> columns;
    /// Replace each category by its relative frequency in the real table.
    bool encode_categorical = false;
    GmmConfig gmm;
};

struct DsiResult {
    double overall = 0.0;  // 100 * mean term, in [0, 100]
    double term_min = 0.0;
    double term_max = 0.0;
    double term_mean = 0.0;
    /// Mean per-row log-likelihood of the standardized real rows.
    double reference_loglik = 0.0;
    std::size_t real_rows_used = 0;
    std::size_t real_rows_dropped = 0;
    std::size_t syn_rows_used = 0;
    std::size_t syn_rows_dropped = 0;
    std::vector<std::string> columns_used;
    std::vector<std::string> warnings;
    GmmModel model;
    std::size_t iterations = 0;
    bool converged = false;
};

/// Per synthetic row i: term_i = clamp(1 - |l_i - L| / |L|, 0, 1), where l_i
/// is the row's log-likelihood under a mixture fitted to the real rows and L
/// the mean real-row log-likelihood. Both tables are standardized with the
/// real per-column mean and population standard deviation; constant columns
/// are dropped with a warning and rows with Nulls are skipped and counted.
/// Throws DegenerateData, SchemaMismatch, UnknownColumn, TypeError.
DsiResult dsi(const Table& real, const Table& syn, const DsiOptions& options = {});

}  // namespace tabcheck
