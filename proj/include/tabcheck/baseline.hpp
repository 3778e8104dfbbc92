#pragma once

#include <map>
#include <string>
#include <vector>

#include "tabcheck/table.hpp"

namespace tabcheck {

struct ColumnBaseline {
    double density = 0.0;   // 100 * (1 - KS) or 100 * (1 - TV)
    double coverage = 0.0;  // 100 * range or category overlap
};

struct PairAssociation {
    std::string first;
    std::string second;
    double real = 0.0;  // Pearson r, Cramer's V or correlation ratio
    double syn = 0.0;
};

struct BaselineResult {
    double density = 0.0;
    double correlation = 0.0;
    double coverage = 0.0;
    std::map<std::string, ColumnBaseline> per_column;
    std::vector<PairAssociation> per_pair;
    std::vector<std::string> warnings;
};

/// Two-sample Kolmogorov-Smirnov statistic. Inputs need not be sorted.
double ks_statistic(std::vector<double> a, std::vector<double> b);

/// Half the L1 distance between the relative frequency vectors.
double total_variation(const std::vector<std::string>& a, const std::vector<std::string>& b);

/// Mean over columns of 100 * (1 - KS) for integer, real and datetime
/// columns and 100 * (1 - TV) for categorical ones. Nulls are ignored;
/// columns with no values on either side are skipped with a warning.
/// Throws SchemaMismatch, EmptyTable.
double density_score(const Table& real, const Table& syn, BaselineResult* detail = nullptr);

/// 100 * (1 - mean over column pairs of |A_real - A_syn| / 2), with A the
/// Pearson correlation (numeric pairs), Cramer's V (categorical pairs) or
/// the correlation ratio (mixed pairs). Degenerate pairs count as 0 with a
/// warning. Throws SchemaMismatch, EmptyTable, InvalidArgument.
double correlation_score(const Table& real, const Table& syn, BaselineResult* detail = nullptr);

/// Mean over columns of the share of the real range (or category set)
/// covered by the synthetic column, times 100. A column whose real range is
/// a single point scores 100. Throws SchemaMismatch, EmptyTable.
double coverage_score(const Table& real, const Table& syn, BaselineResult* detail = nullptr);

/// All three scores with per-column and per-pair breakdowns.
BaselineResult baselines(const Table& real, const Table& syn);

}  // namespace tabcheck
