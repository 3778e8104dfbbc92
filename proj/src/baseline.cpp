#include "tabcheck/baseline.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "column_util.hpp"
#include "tabcheck/error.hpp"
#include "tabcheck/parallel.hpp"

namespace tabcheck {

namespace {

// One column of one table: ordinal values (NaN = missing) or category codes
// (-1 = missing) with the number of distinct codes.
struct Encoded {
    bool categorical = false;
    std::vector<double> values;
    std::vector<int> codes;
    int levels = 0;
};

Encoded encode(const Table& t, std::size_t col) {
    Encoded e;
    e.categorical = t.schema().column(col).kind == ColumnKind::Categorical;
    if (!e.categorical) {
        e.values = ordinal_column(t, col);
        return e;
    }
    std::unordered_map<std::string, int> dict;
    e.codes.resize(t.row_count(), -1);
    for (std::size_t r = 0; r < t.row_count(); ++r) {
        if (const auto* s = std::get_if<std::string>(&t.cell(r, col))) {
            const auto [it, fresh] = dict.try_emplace(*s, static_cast<int>(dict.size()));
            e.codes[r] = it->second;
        }
    }
    e.levels = static_cast<int>(dict.size());
    return e;
}

std::vector<double> present(const std::vector<double>& xs) {
    std::vector<double> out;
    for (double x : xs) {
        if (!std::isnan(x)) out.push_back(x);
    }
    return out;
}

std::vector<std::string> categories(const Table& t, std::size_t col) {
    std::vector<std::string> out;
    for (std::size_t r = 0; r < t.row_count(); ++r) {
        if (const auto* s = std::get_if<std::string>(&t.cell(r, col))) out.push_back(*s);
    }
    return out;
}

// Pairs each real column with the synthetic column of the same name.
std::vector<std::pair<std::size_t, std::size_t>> align(const Table& real, const Table& syn) {
    if (real.row_count() == 0) throw Error(Errc::EmptyTable, "real table has no rows");
    if (syn.row_count() == 0) throw Error(Errc::EmptyTable, "synthetic table has no rows");
    std::vector<std::pair<std::size_t, std::size_t>> out;
    for (std::size_t i = 0; i < real.column_count(); ++i) {
        const Column& c = real.schema().column(i);
        const auto j = syn.schema().index_of(c.name);
        if (!j || syn.schema().column(*j).kind != c.kind) {
            throw Error(Errc::SchemaMismatch,
                        "synthetic table lacks " + std::string(kind_name(c.kind)) + " column '" + c.name + "'");
        }
        out.emplace_back(i, *j);
    }
    return out;
}

double pearson(const std::vector<double>& x, const std::vector<double>& y, bool& degenerate) {
    double sx = 0, sy = 0;
    std::size_t n = 0;
    for (std::size_t r = 0; r < x.size(); ++r) {
        if (std::isnan(x[r]) || std::isnan(y[r])) continue;
        sx += x[r];
        sy += y[r];
        ++n;
    }
    degenerate = true;
    if (n < 2) return 0.0;
    const double mx = sx / static_cast<double>(n), my = sy / static_cast<double>(n);
    double sxx = 0, syy = 0, sxy = 0;
    for (std::size_t r = 0; r < x.size(); ++r) {
        if (std::isnan(x[r]) || std::isnan(y[r])) continue;
        const double dx = x[r] - mx, dy = y[r] - my;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if (!(sxx > 0.0) || !(syy > 0.0)) return 0.0;
    degenerate = false;
    return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

double cramers_v(const Encoded& a, const Encoded& b, bool& degenerate) {
    const std::size_t cells = static_cast<std::size_t>(a.levels) * static_cast<std::size_t>(b.levels);
    std::vector<double> row_tot(static_cast<std::size_t>(a.levels), 0.0);
    std::vector<double> col_tot(static_cast<std::size_t>(b.levels), 0.0);
    std::unordered_map<std::size_t, double> sparse;
    std::vector<double> dense;
    const bool use_dense = cells <= (1u << 20);
    if (use_dense) dense.assign(cells, 0.0);
    double n = 0;
    for (std::size_t r = 0; r < a.codes.size(); ++r) {
        const int i = a.codes[r], j = b.codes[r];
        if (i < 0 || j < 0) continue;
        const std::size_t key = static_cast<std::size_t>(i) * static_cast<std::size_t>(b.levels) +
                                static_cast<std::size_t>(j);
        if (use_dense) {
            dense[key] += 1.0;
        } else {
            sparse[key] += 1.0;
        }
        row_tot[static_cast<std::size_t>(i)] += 1.0;
        col_tot[static_cast<std::size_t>(j)] += 1.0;
        n += 1.0;
    }
    const auto observed = [](const std::vector<double>& v) {
        return static_cast<double>(std::count_if(v.begin(), v.end(), [](double c) { return c > 0.0; }));
    };
    const double k = std::min(observed(row_tot), observed(col_tot)) - 1.0;
    degenerate = true;
    if (n == 0 || k < 1.0) return 0.0;
    // chi^2 / n = sum O^2 / (row * col) - 1
    double acc = 0.0;
    const auto add = [&](std::size_t key, double o) {
        acc += o * o / (row_tot[key / static_cast<std::size_t>(b.levels)] *
                        col_tot[key % static_cast<std::size_t>(b.levels)]);
    };
    if (use_dense) {
        for (std::size_t key = 0; key < cells; ++key) {
            if (dense[key] > 0.0) add(key, dense[key]);
        }
    } else {
        std::vector<std::pair<std::size_t, double>> entries(sparse.begin(), sparse.end());
        std::sort(entries.begin(), entries.end());
        for (const auto& [key, o] : entries) add(key, o);
    }
    degenerate = false;
    const double phi2 = std::max(0.0, acc - 1.0);
    return std::min(1.0, std::sqrt(phi2 / k));
}

double correlation_ratio(const Encoded& cat, const Encoded& num, bool& degenerate) {
    std::vector<double> sum(static_cast<std::size_t>(cat.levels), 0.0), cnt(static_cast<std::size_t>(cat.levels), 0.0);
    double total = 0, n = 0;
    for (std::size_t r = 0; r < cat.codes.size(); ++r) {
        if (cat.codes[r] < 0 || std::isnan(num.values[r])) continue;
        sum[static_cast<std::size_t>(cat.codes[r])] += num.values[r];
        cnt[static_cast<std::size_t>(cat.codes[r])] += 1.0;
        total += num.values[r];
        n += 1.0;
    }
    degenerate = true;
    if (n < 2) return 0.0;
    const double mean = total / n;
    double ss_total = 0;
    for (std::size_t r = 0; r < cat.codes.size(); ++r) {
        if (cat.codes[r] < 0 || std::isnan(num.values[r])) continue;
        ss_total += (num.values[r] - mean) * (num.values[r] - mean);
    }
    if (!(ss_total > 0.0)) return 0.0;
    double ss_between = 0;
    for (std::size_t g = 0; g < sum.size(); ++g) {
        if (cnt[g] > 0) {
            const double d = sum[g] / cnt[g] - mean;
            ss_between += cnt[g] * d * d;
        }
    }
    degenerate = false;
    return std::min(1.0, std::sqrt(ss_between / ss_total));
}

double association(const Encoded& a, const Encoded& b, bool& degenerate) {
    if (a.categorical && b.categorical) return cramers_v(a, b, degenerate);
    if (!a.categorical && !b.categorical) return pearson(a.values, b.values, degenerate);
    return a.categorical ? correlation_ratio(a, b, degenerate) : correlation_ratio(b, a, degenerate);
}

}  // namespace

double ks_statistic(std::vector<double> a, std::vector<double> b) {
    if (a.empty() || b.empty()) throw Error(Errc::EmptyTable, "KS statistic needs two non-empty samples");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < a.size() && j < b.size()) {
        const double v = std::min(a[i], b[j]);
        while (i < a.size() && a[i] == v) ++i;
        while (j < b.size() && b[j] == v) ++j;
        d = std::max(d, std::fabs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    return d;
}

double total_variation(const std::vector<std::string>& a, const std::vector<std::string>& b) {
    if (a.empty() || b.empty()) throw Error(Errc::EmptyTable, "total variation needs two non-empty samples");
    std::unordered_map<std::string, std::pair<double, double>> freq;
    for (const std::string& s : a) freq[s].first += 1.0;
    for (const std::string& s : b) freq[s].second += 1.0;
    std::vector<double> gaps;
    gaps.reserve(freq.size());
    for (const auto& [k, f] : freq) {
        gaps.push_back(std::fabs(f.first / static_cast<double>(a.size()) - f.second / static_cast<double>(b.size())));
    }
    std::sort(gaps.begin(), gaps.end());
    double l1 = 0.0;
    for (double g : gaps) l1 += g;
    return std::min(1.0, 0.5 * l1);
}

double density_score(const Table& real, const Table& syn, BaselineResult* detail) {
    const auto cols = align(real, syn);
    double sum = 0.0;
    std::size_t used = 0;
    for (const auto& [i, j] : cols) {
        const Column& c = real.schema().column(i);
        double score;
        if (c.kind == ColumnKind::Categorical) {
            const auto a = categories(real, i), b = categories(syn, j);
            if (a.empty() || b.empty()) {
                if (detail) detail->warnings.push_back("density: column '" + c.name + "' has no values; skipped");
                continue;
            }
            score = 100.0 * (1.0 - total_variation(a, b));
        } else {
            auto a = present(ordinal_column(real, i)), b = present(ordinal_column(syn, j));
            if (a.empty() || b.empty()) {
                if (detail) detail->warnings.push_back("density: column '" + c.name + "' has no values; skipped");
                continue;
            }
            score = 100.0 * (1.0 - ks_statistic(std::move(a), std::move(b)));
        }
        if (detail) detail->per_column[c.name].density = score;
        sum += score;
        ++used;
    }
    if (used == 0) throw Error(Errc::EmptyTable, "density: no column has values on both sides");
    const double overall = sum / static_cast<double>(used);
    if (detail) detail->density = overall;
    return overall;
}

double correlation_score(const Table& real, const Table& syn, BaselineResult* detail) {
    const auto cols = align(real, syn);
    if (cols.size() < 2) throw Error(Errc::InvalidArgument, "correlation needs at least two columns");
    std::vector<Encoded> er, es;
    for (const auto& [i, j] : cols) {
        er.push_back(encode(real, i));
        es.push_back(encode(syn, j));
    }
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    for (std::size_t a = 0; a < cols.size(); ++a) {
        for (std::size_t b = a + 1; b < cols.size(); ++b) pairs.emplace_back(a, b);
    }
    std::vector<double> ar(pairs.size()), as(pairs.size());
    std::vector<char> dr(pairs.size()), ds(pairs.size());
    parallel_for(pairs.size(), [&](std::size_t begin, std::size_t end) {
        for (std::size_t p = begin; p < end; ++p) {
            bool d1 = false, d2 = false;
            ar[p] = association(er[pairs[p].first], er[pairs[p].second], d1);
            as[p] = association(es[pairs[p].first], es[pairs[p].second], d2);
            dr[p] = d1;
            ds[p] = d2;
        }
    });
    double gap = 0.0;
    for (std::size_t p = 0; p < pairs.size(); ++p) {
        gap += std::fabs(ar[p] - as[p]) / 2.0;
        if (detail) {
            const std::string& n1 = real.schema().column(cols[pairs[p].first].first).name;
            const std::string& n2 = real.schema().column(cols[pairs[p].second].first).name;
            detail->per_pair.push_back({n1, n2, ar[p], as[p]});
            for (int side = 0; side < 2; ++side) {
                if (side == 0 ? dr[p] : ds[p]) {
                    detail->warnings.push_back("correlation: pair (" + n1 + ", " + n2 + ") is constant in the " +
                                               (side == 0 ? "real" : "synthetic") + " table; association set to 0");
                }
            }
        }
    }
    const double overall = 100.0 * (1.0 - gap / static_cast<double>(pairs.size()));
    if (detail) detail->correlation = overall;
    return overall;
}

double coverage_score(const Table& real, const Table& syn, BaselineResult* detail) {
    const auto cols = align(real, syn);
    double sum = 0.0;
    std::size_t used = 0;
    for (const auto& [i, j] : cols) {
        const Column& c = real.schema().column(i);
        double share;
        if (c.kind == ColumnKind::Categorical) {
            auto a = categories(real, i), b = categories(syn, j);
            std::sort(a.begin(), a.end());
            a.erase(std::unique(a.begin(), a.end()), a.end());
            std::sort(b.begin(), b.end());
            b.erase(std::unique(b.begin(), b.end()), b.end());
            if (a.empty()) {
                if (detail) detail->warnings.push_back("coverage: column '" + c.name + "' has no real values; skipped");
                continue;
            }
            std::vector<std::string> both;
            std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(both));
            share = static_cast<double>(both.size()) / static_cast<double>(a.size());
        } else {
            const auto a = present(ordinal_column(real, i)), b = present(ordinal_column(syn, j));
            if (a.empty()) {
                if (detail) detail->warnings.push_back("coverage: column '" + c.name + "' has no real values; skipped");
                continue;
            }
            const auto [rlo, rhi] = std::minmax_element(a.begin(), a.end());
            if (*rlo == *rhi) {
                share = 1.0;
            } else if (b.empty()) {
                share = 0.0;
            } else {
                const auto [slo, shi] = std::minmax_element(b.begin(), b.end());
                const double overlap = std::min(*rhi, *shi) - std::max(*rlo, *slo);
                share = std::max(0.0, overlap) / (*rhi - *rlo);
            }
        }
        if (detail) detail->per_column[c.name].coverage = 100.0 * share;
        sum += share;
        ++used;
    }
    if (used == 0) throw Error(Errc::EmptyTable, "coverage: real table has no values");
    const double overall = 100.0 * sum / static_cast<double>(used);
    if (detail) detail->coverage = overall;
    return overall;
}

BaselineResult baselines(const Table& real, const Table& syn) {
    BaselineResult r;
    density_score(real, syn, &r);
    correlation_score(real, syn, &r);
    coverage_score(real, syn, &r);
    return r;
}

}  // namespace tabcheck
