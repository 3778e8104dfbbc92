#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tabcheck/gmm.hpp"

namespace tabcheck {

/// Metric identifiers in report order.
inline const std::vector<std::string> kAllMetrics{"hcs", "mdi", "dsi", "density", "correlation", "coverage"};

/// Display label used in the text report ("HCS", "Density", ...).
std::string metric_label(std::string_view metric);

struct EvalConfig {
    std::filesystem::path real_path;
    std::filesystem::path syn_path;
    std::filesystem::path schema_path;
    std::filesystem::path rules_path;  // may be empty when no hcs/mdi is requested
    std::size_t repeats = 10;
    double subsample_fraction = 1.0;
    std::uint64_t base_seed = 42;
    GmmConfig gmm;
    bool dsi_encode_categorical = false;
    std::vector<std::string> metrics = kAllMetrics;

    /// Checks repeats >= 1, fraction in (0, 1], known and non-empty metrics.
    /// Throws InvalidArgument.
    void validate() const;
    bool operator==(const EvalConfig&) const = default;
};

struct MetricSummary {
    std::string metric;
    std::vector<double> values;  // one per completed repeat
    double mean = 0.0;
    double std = 0.0;            // population standard deviation
    double seconds = 0.0;        // wall time summed over repeats
    std::string error;           // non-empty when the metric failed

    bool ok() const { return error.empty(); }
    bool operator==(const MetricSummary&) const = default;
};

struct ViolationSample {
    std::string metric;  // "hcs" or "mdi"
    std::string target;  // group or rule name
    std::size_t row = 0;
    std::string verdict;  // "invalid", "false" or "undetermined"
    std::vector<std::string> values;  // tuple, or column=value pairs

    bool operator==(const ViolationSample&) const = default;
};

struct Report {
    EvalConfig config;
    std::size_t real_rows = 0;
    std::size_t syn_rows = 0;
    std::size_t evaluated_rows = 0;  // per repeat, after subsampling
    std::vector<MetricSummary> metrics;
    /// Repeat-0 breakdown keyed "<metric>/<part>", e.g. "hcs/geo" or
    /// "density/price".
    std::map<std::string, double> breakdown;
    std::vector<ViolationSample> violations;  // from repeat 0
    std::vector<std::string> warnings;
    std::optional<std::string> gmm_dump;  // repeat-0 model, when requested

    bool complete() const;
    bool operator==(const Report&) const = default;
};

/// Population mean and standard deviation.
std::pair<double, double> mean_std(const std::vector<double>& values);

/// Runs every requested metric `repeats` times with seed base_seed + r,
/// optionally on a seeded row subsample of the synthetic table. Input
/// errors throw (with the offending file named); a metric that fails is
/// recorded in its summary and the remaining metrics still run.
Report run_eval(const EvalConfig& config, bool dump_gmm = false);

enum class ReportFormat { Json, Text };

/// JSON omits the timing fields when `timing` is false.
std::string emit_report(const Report& report, ReportFormat format, bool timing = true);

/// Inverse of the JSON emitter. Throws ParseError.
Report report_from_json(std::string_view text);

}  // namespace tabcheck
