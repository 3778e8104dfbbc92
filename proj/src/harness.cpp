#include "tabcheck/harness.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "column_util.hpp"
#include "tabcheck/error.hpp"
#include "tabcheck/parallel.hpp"

namespace tabcheck {

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

std::size_t affected_rows(double fraction, std::size_t rows) {
    if (!(fraction >= 0.0 && fraction <= 1.0)) {
        throw Error(Errc::InvalidArgument, "fraction must lie in [0, 1]");
    }
    const double x = fraction * static_cast<double>(rows);
    const double nearest = std::round(x);
    if (std::fabs(x - nearest) <= 1e-9 * std::max(1.0, x)) return static_cast<std::size_t>(nearest);
    return static_cast<std::size_t>(std::ceil(x));
}

std::vector<std::size_t> sample_rows(std::size_t n, std::size_t count, std::uint64_t seed) {
    if (count > n) throw Error(Errc::InvalidArgument, "cannot sample more rows than exist");
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::mt19937_64 rng(mix_seed(seed, 0));
    for (std::size_t i = 0; i < count; ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, n - 1);
        std::swap(idx[i], idx[pick(rng)]);
    }
    idx.resize(count);
    std::sort(idx.begin(), idx.end());
    return idx;
}

namespace {

const DependencyRule& find_rule(const RuleSet& rules, const std::string& name) {
    for (const DependencyRule& r : rules.rules) {
        if (r.name == name) return r;
    }
    throw Error(Errc::UnknownTarget, "no rule named '" + name + "'");
}

std::size_t find_column(const Table& t, const std::string& name) {
    const auto i = t.schema().index_of(name);
    if (!i) throw Error(Errc::UnknownTarget, "no column named '" + name + "'");
    return *i;
}

Expr bind(const DependencyRule& rule, const Schema& schema) {
    Expr e = rule.expr;
    type_check(e, schema);
    return e;
}

void corrupt_group(Table& t, const CorruptGroup& op, std::uint64_t seed, const RuleSet& rules) {
    const ConsistencyGroup* group = nullptr;
    for (const ConsistencyGroup& g : rules.groups) {
        if (g.name == op.group) group = &g;
    }
    if (!group) throw Error(Errc::UnknownTarget, "no group named '" + op.group + "'");
    const std::size_t col = find_column(t, group->columns.front());
    if (t.schema().column(col).kind != ColumnKind::Categorical) {
        throw Error(Errc::InvalidArgument, "group '" + op.group + "' does not start with a categorical column");
    }
    for (std::size_t row : sample_rows(t.row_count(), affected_rows(op.fraction, t.row_count()), seed)) {
        t.set_cell(row, col, "⊥" + std::to_string(seed) + "-" + std::to_string(row));
    }
}

// Candidate single-cell edits for one column, in the order they are tried.
std::vector<Value> candidate_edits(const Table& t, std::size_t row, std::size_t col,
                                   const std::vector<std::size_t>& referenced, double tolerance) {
    const Column& c = t.schema().column(col);
    const Value& v = t.cell(row, col);
    std::vector<Value> out;
    const double step = 10.0 * tolerance + 1.0;
    if (c.kind == ColumnKind::Integer) {
        const std::int64_t base = is_null(v) ? 0 : std::get<std::int64_t>(v);
        const auto d = static_cast<std::int64_t>(std::ceil(step));
        out.emplace_back(base + d);
        out.emplace_back(base - d);
    } else if (c.kind == ColumnKind::Real) {
        const double base = is_null(v) ? 0.0 : std::get<double>(v);
        out.emplace_back(base + step);
        out.emplace_back(base - step);
    } else if (c.kind == ColumnKind::Datetime) {
        for (std::size_t other : referenced) {
            if (other != col && t.schema().column(other).kind == ColumnKind::Datetime &&
                !is_null(t.cell(row, other))) {
                out.push_back(t.cell(row, other));
            }
        }
        if (!is_null(v)) {
            const std::int64_t base = std::get<Timestamp>(v).micros;
            for (std::int64_t days : {1, 30, 3650}) {
                out.emplace_back(Timestamp{base + days * kMicrosPerDay});
                out.emplace_back(Timestamp{base - days * kMicrosPerDay});
            }
        }
    }
    return out;
}

void break_rule(Table& t, const BreakRule& op, std::uint64_t seed, const RuleSet& rules) {
    const DependencyRule& target = find_rule(rules, op.rule);
    const Expr expr = bind(target, t.schema());
    std::vector<std::size_t> referenced;
    for (const std::string& name : referenced_columns(target.expr)) referenced.push_back(find_column(t, name));
    std::vector<std::pair<Expr, double>> others;
    for (const DependencyRule& r : rules.rules) {
        if (r.name != target.name) others.emplace_back(bind(r, t.schema()), r.tolerance);
    }

    for (std::size_t row : sample_rows(t.row_count(), affected_rows(op.fraction, t.row_count()), seed)) {
        Row cells(t.row(row).begin(), t.row(row).end());
        std::vector<Truth> before;
        for (const auto& [e, tol] : others) before.push_back(eval_expr(e, cells, tol));

        // Prefer an edit that leaves every other rule's verdict unchanged.
        std::optional<std::pair<std::size_t, Value>> fallback;
        std::optional<std::pair<std::size_t, Value>> chosen;
        for (std::size_t col : referenced) {
            for (Value& edit : candidate_edits(t, row, col, referenced, target.tolerance)) {
                Row trial = cells;
                trial[col] = edit;
                if (eval_expr(expr, trial, target.tolerance) != Truth::False) continue;
                bool isolated = true;
                for (std::size_t k = 0; k < others.size() && isolated; ++k) {
                    isolated = eval_expr(others[k].first, trial, others[k].second) == before[k];
                }
                if (isolated) {
                    chosen.emplace(col, std::move(edit));
                    break;
                }
                if (!fallback) fallback.emplace(col, std::move(edit));
            }
            if (chosen) break;
        }
        if (!chosen) chosen = std::move(fallback);
        if (!chosen) {
            throw Error(Errc::InvalidArgument,
                        "rule '" + op.rule + "' cannot be falsified on row " + std::to_string(row));
        }
        t.set_cell(row, chosen->first, std::move(chosen->second));
    }
}

void swap_dates(Table& t, const SwapDates& op, std::uint64_t seed, const RuleSet& rules) {
    const DependencyRule& rule = find_rule(rules, op.rule);
    std::vector<std::size_t> dates;
    for (const std::string& name : referenced_columns(rule.expr)) {
        const std::size_t c = find_column(t, name);
        if (t.schema().column(c).kind == ColumnKind::Datetime) dates.push_back(c);
    }
    if (dates.size() != 2) {
        throw Error(Errc::InvalidArgument, "rule '" + op.rule + "' must reference exactly two datetime columns");
    }
    for (std::size_t row : sample_rows(t.row_count(), affected_rows(op.fraction, t.row_count()), seed)) {
        Value a = t.cell(row, dates[0]);
        t.set_cell(row, dates[0], t.cell(row, dates[1]));
        t.set_cell(row, dates[1], std::move(a));
    }
}

void shuffle_column(Table& t, const ShuffleColumn& op, std::uint64_t seed) {
    const std::size_t col = find_column(t, op.column);
    std::vector<Value> cells = t.column(col);
    std::mt19937_64 rng(mix_seed(seed, 1));
    std::shuffle(cells.begin(), cells.end(), rng);
    for (std::size_t r = 0; r < cells.size(); ++r) t.set_cell(r, col, std::move(cells[r]));
}

void gaussian_noise(Table& t, const GaussianNoise& op, std::uint64_t seed) {
    if (!(op.sigma >= 0.0) || !std::isfinite(op.sigma)) {
        throw Error(Errc::InvalidArgument, "sigma must be finite and nonnegative");
    }
    std::vector<std::size_t> cols;
    for (const std::string& name : op.columns) {
        const std::size_t c = find_column(t, name);
        if (!is_numeric(t.schema().column(c).kind)) {
            throw Error(Errc::InvalidArgument, "column '" + name + "' is not numeric");
        }
        cols.push_back(c);
    }
    std::mt19937_64 rng(mix_seed(seed, 2));
    std::normal_distribution<double> noise(0.0, op.sigma);
    for (std::size_t r = 0; r < t.row_count(); ++r) {
        for (std::size_t c : cols) {
            const Value& v = t.cell(r, c);
            if (is_null(v)) continue;
            const double x = ordinal(v) + noise(rng);
            if (t.schema().column(c).kind == ColumnKind::Integer) {
                t.set_cell(r, c, static_cast<std::int64_t>(std::llround(x)));
            } else {
                t.set_cell(r, c, x);
            }
        }
    }
}

}  // namespace

Table perturb(const Table& table, const Perturbation& p, const RuleSet& rules) {
    Table out = table;
    std::visit(
        [&](const auto& op) {
            using T = std::decay_t<decltype(op)>;
            if constexpr (std::is_same_v<T, CorruptGroup>) {
                corrupt_group(out, op, p.seed, rules);
            } else if constexpr (std::is_same_v<T, BreakRule>) {
                break_rule(out, op, p.seed, rules);
            } else if constexpr (std::is_same_v<T, SwapDates>) {
                swap_dates(out, op, p.seed, rules);
            } else if constexpr (std::is_same_v<T, ShuffleColumn>) {
                shuffle_column(out, op, p.seed);
            } else {
                gaussian_noise(out, op, p.seed);
            }
        },
        p.kind);
    return out;
}

Table smote_like(const Table& real, std::size_t n_samples, std::size_t k_neighbors, std::uint64_t seed) {
    Table out(real.schema());
    if (n_samples == 0) return out;
    if (k_neighbors == 0) throw Error(Errc::InvalidArgument, "k_neighbors must be positive");

    std::vector<std::size_t> numeric;
    for (std::size_t c = 0; c < real.column_count(); ++c) {
        if (is_numeric(real.schema().column(c).kind)) numeric.push_back(c);
    }
    if (numeric.empty()) throw Error(Errc::InsufficientRows, "table has no numeric column to interpolate");

    std::vector<std::size_t> complete;
    for (std::size_t r = 0; r < real.row_count(); ++r) {
        if (std::none_of(numeric.begin(), numeric.end(), [&](std::size_t c) { return is_null(real.cell(r, c)); })) {
            complete.push_back(r);
        }
    }
    if (complete.size() < k_neighbors + 1) {
        throw Error(Errc::InsufficientRows, std::to_string(complete.size()) + " complete rows cannot supply " +
                                                std::to_string(k_neighbors) + " neighbors");
    }

    // Standardized numeric matrix over complete rows, row-major.
    const std::size_t d = numeric.size(), n = complete.size();
    std::vector<double> z(n * d);
    for (std::size_t j = 0; j < d; ++j) {
        std::vector<double> xs(n);
        for (std::size_t i = 0; i < n; ++i) xs[i] = ordinal(real.cell(complete[i], numeric[j]));
        const Moments m = moments(xs);
        const double scale = m.std > 0.0 ? m.std : 1.0;
        for (std::size_t i = 0; i < n; ++i) z[i * d + j] = (xs[i] - m.mean) / scale;
    }

    std::vector<Row> rows(n_samples);
    parallel_for(n_samples, [&](std::size_t begin, std::size_t end) {
        std::vector<std::pair<double, std::size_t>> dist(n - 1);
        for (std::size_t s = begin; s < end; ++s) {
            std::mt19937_64 rng(mix_seed(seed, s));
            const std::size_t b = std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
            std::size_t w = 0;
            for (std::size_t i = 0; i < n; ++i) {
                if (i == b) continue;
                double acc = 0.0;
                for (std::size_t j = 0; j < d; ++j) {
                    const double diff = z[i * d + j] - z[b * d + j];
                    acc += diff * diff;
                }
                dist[w++] = {acc, i};
            }
            std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k_neighbors), dist.end());
            const std::size_t nb =
                dist[std::uniform_int_distribution<std::size_t>(0, k_neighbors - 1)(rng)].second;
            const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);

            const auto base_row = real.row(complete[b]);
            Row row(base_row.begin(), base_row.end());
            for (std::size_t c : numeric) {
                const double x0 = ordinal(real.cell(complete[b], c));
                const double x1 = ordinal(real.cell(complete[nb], c));
                const double x = std::clamp(x0 + u * (x1 - x0), std::min(x0, x1), std::max(x0, x1));
                if (real.schema().column(c).kind == ColumnKind::Integer) {
                    row[c] = static_cast<std::int64_t>(std::llround(x));
                } else {
                    row[c] = x;
                }
            }
            rows[s] = std::move(row);
        }
    });
    for (Row& r : rows) out.append(std::move(r));
    return out;
}

}  // namespace tabcheck
