#include "tabcheck/consistency.hpp"

#include <fstream>

#include "tabcheck/error.hpp"
#include "tabcheck/parallel.hpp"
#include "text_util.hpp"

namespace tabcheck {

std::size_t TupleHash::operator()(const Tuple& t) const noexcept {
    std::size_t h = 0x9e3779b97f4a7c15ULL;
    for (const std::string& s : t) {
        h ^= std::hash<std::string>{}(s) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    }
    return h;
}

bool ValidTupleSet::insert(Tuple tuple) {
    if (tuple.size() != arity_) {
        throw Error(Errc::InvalidArgument, "tuple of arity " + std::to_string(tuple.size()) + " for group '" +
                                               group_ + "' of arity " + std::to_string(arity_));
    }
    for (std::string& s : tuple) s = std::string(trim(s));
    return tuples_.insert(std::move(tuple)).second;
}

namespace {

std::vector<std::size_t> group_indices(const Schema& schema, const ConsistencyGroup& group, bool categorical_only) {
    std::vector<std::size_t> idx;
    idx.reserve(group.columns.size());
    for (const std::string& name : group.columns) {
        const auto i = schema.index_of(name);
        if (!i) throw Error(Errc::SchemaMismatch, "group '" + group.name + "': table lacks column '" + name + "'");
        if (categorical_only && schema.column(*i).kind != ColumnKind::Categorical) {
            throw Error(Errc::NonCategoricalColumn,
                        "group '" + group.name + "': column '" + name + "' is " +
                            std::string(kind_name(schema.column(*i).kind)));
        }
        idx.push_back(*i);
    }
    return idx;
}

// Trimmed tuple of the row, or false if any cell is Null.
bool extract(std::span<const Value> row, const std::vector<std::size_t>& idx, Tuple& out) {
    out.resize(idx.size());
    for (std::size_t k = 0; k < idx.size(); ++k) {
        const auto* s = std::get_if<std::string>(&row[idx[k]]);
        if (!s) return false;
        out[k] = std::string(trim(*s));
    }
    return true;
}

}  // namespace

ValidTupleSet infer_valid_tuples(const Table& real, const ConsistencyGroup& group) {
    const auto idx = group_indices(real.schema(), group, true);
    ValidTupleSet set(group.name, idx.size());
    Tuple t;
    for (std::size_t r = 0; r < real.row_count(); ++r) {
        if (extract(real.row(r), idx, t)) set.insert(t);
    }
    if (set.size() == 0) {
        throw Error(Errc::EmptyReference, "group '" + group.name + "': reference table has no complete rows");
    }
    return set;
}

ValidTupleSet load_valid_tuples(const std::filesystem::path& path, const ConsistencyGroup& group) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(Errc::FileNotFound, path.string());
    CsvOptions opts;
    std::vector<std::string> fields;
    std::vector<bool> quoted;
    if (!read_csv_record(in, fields, quoted, opts)) {
        throw Error(Errc::HeaderMismatch, path.string() + ": missing header row");
    }
    std::vector<std::size_t> positions;
    for (const std::string& col : group.columns) {
        std::size_t found = fields.size();
        for (std::size_t i = 0; i < fields.size(); ++i) {
            if (trim(fields[i]) == col) found = i;
        }
        if (found == fields.size()) {
            throw Error(Errc::HeaderMismatch, path.string() + ": header lacks column '" + col + "'");
        }
        positions.push_back(found);
    }
    const std::size_t width = fields.size();
    ValidTupleSet set(group.name, group.columns.size());
    std::size_t line = 1;
    while (read_csv_record(in, fields, quoted, opts)) {
        ++line;
        if (fields.size() == 1 && fields[0].empty()) continue;
        if (fields.size() != width) {
            throw CellParseError(line, "*", std::to_string(fields.size()) + " fields",
                                 "expected " + std::to_string(width));
        }
        Tuple t;
        for (std::size_t p : positions) t.push_back(fields[p]);
        set.insert(std::move(t));
    }
    if (set.size() == 0) throw Error(Errc::EmptyReference, path.string() + ": no tuples");
    return set;
}

ValidTupleSet resolve_valid_tuples(const Table& real, const ConsistencyGroup& group) {
    if (const auto* file = std::get_if<ExplicitTupleFile>(&group.reference)) {
        return load_valid_tuples(file->path, group);
    }
    return infer_valid_tuples(real, group);
}

HcsResult hcs(const Table& syn, const std::vector<ConsistencyGroup>& groups, const std::vector<ValidTupleSet>& valid,
              std::size_t violation_cap) {
    if (groups.empty() || groups.size() != valid.size()) {
        throw Error(Errc::InvalidArgument, "need one valid tuple set per group and at least one group");
    }
    const std::size_t m = syn.row_count();
    if (m == 0) throw Error(Errc::EmptyTable, "synthetic table has no rows");

    std::vector<std::vector<std::size_t>> indices;
    for (const ConsistencyGroup& g : groups) indices.push_back(group_indices(syn.schema(), g, false));

    // ok[k][j] == 1 iff row j satisfies group k; written per index, so the
    // result does not depend on how rows are split across threads.
    std::vector<std::vector<char>> ok(groups.size(), std::vector<char>(m, 0));
    parallel_for(m, [&](std::size_t begin, std::size_t end) {
        Tuple t;
        for (std::size_t j = begin; j < end; ++j) {
            const auto row = syn.row(j);
            for (std::size_t k = 0; k < groups.size(); ++k) {
                ok[k][j] = extract(row, indices[k], t) && valid[k].contains(t);
            }
        }
    });

    HcsResult result;
    std::size_t total_valid = 0;
    for (std::size_t k = 0; k < groups.size(); ++k) {
        GroupScore gs;
        gs.row_count = m;
        std::size_t sampled = 0;
        for (std::size_t j = 0; j < m; ++j) {
            if (ok[k][j]) {
                ++gs.valid_count;
            } else if (sampled < violation_cap) {
                ++sampled;
                GroupViolation v{j, groups[k].name, {}};
                for (std::size_t c : indices[k]) v.tuple.push_back(display(syn.cell(j, c)));
                result.violations.push_back(std::move(v));
            }
        }
        gs.score = 100.0 * static_cast<double>(gs.valid_count) / static_cast<double>(m);
        total_valid += gs.valid_count;
        result.per_group[groups[k].name] = gs;
    }
    result.overall = 100.0 * static_cast<double>(total_valid) / static_cast<double>(m * groups.size());
    return result;
}

}  // namespace tabcheck
