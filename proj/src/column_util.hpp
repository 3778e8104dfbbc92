#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include "tabcheck/table.hpp"

namespace tabcheck {

// Integer, real and datetime cells as doubles (datetimes in microseconds);
// NaN for Null and categorical cells.
inline double ordinal(const Value& v) {
    if (const auto* i = std::get_if<std::int64_t>(&v)) return static_cast<double>(*i);
    if (const auto* d = std::get_if<double>(&v)) return *d;
    if (const auto* t = std::get_if<Timestamp>(&v)) return static_cast<double>(t->micros);
    return std::numeric_limits<double>::quiet_NaN();
}

inline std::vector<double> ordinal_column(const Table& t, std::size_t col) {
    std::vector<double> out(t.row_count());
    for (std::size_t r = 0; r < t.row_count(); ++r) out[r] = ordinal(t.cell(r, col));
    return out;
}

// Population mean and standard deviation of the finite entries.
struct Moments {
    double mean = 0.0;
    double std = 0.0;
    std::size_t count = 0;
};

inline Moments moments(const std::vector<double>& xs) {
    Moments m;
    double sum = 0.0;
    for (double x : xs) {
        if (std::isfinite(x)) {
            sum += x;
            ++m.count;
        }
    }
    if (m.count == 0) return m;
    m.mean = sum / static_cast<double>(m.count);
    double ss = 0.0;
    for (double x : xs) {
        if (std::isfinite(x)) ss += (x - m.mean) * (x - m.mean);
    }
    m.std = std::sqrt(ss / static_cast<double>(m.count));
    return m;
}

}  // namespace tabcheck
