#include "tabcheck/report.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>

#include <json.hpp>

#include "tabcheck/baseline.hpp"
#include "tabcheck/consistency.hpp"
#include "tabcheck/dependency.hpp"
#include "tabcheck/dsi.hpp"
#include "tabcheck/error.hpp"
#include "tabcheck/harness.hpp"
#include "tabcheck/rules.hpp"

namespace tabcheck {

using nlohmann::ordered_json;

std::string metric_label(std::string_view metric) {
    if (metric == "hcs") return "HCS";
    if (metric == "mdi") return "MDI";
    if (metric == "dsi") return "DSI";
    if (metric == "density") return "Density";
    if (metric == "correlation") return "Correlation";
    if (metric == "coverage") return "Coverage";
    return std::string(metric);
}

void EvalConfig::validate() const {
    if (repeats == 0) throw Error(Errc::InvalidArgument, "repeats must be at least 1");
    if (!(subsample_fraction > 0.0 && subsample_fraction <= 1.0)) {
        throw Error(Errc::InvalidArgument, "subsample fraction must lie in (0, 1]");
    }
    if (metrics.empty()) throw Error(Errc::InvalidArgument, "no metric selected");
    for (const std::string& m : metrics) {
        if (std::find(kAllMetrics.begin(), kAllMetrics.end(), m) == kAllMetrics.end()) {
            throw Error(Errc::InvalidArgument, "unknown metric '" + m + "'");
        }
        if (std::count(metrics.begin(), metrics.end(), m) > 1) {
            throw Error(Errc::InvalidArgument, "metric '" + m + "' selected twice");
        }
    }
    gmm.validate();
}

bool Report::complete() const {
    return std::all_of(metrics.begin(), metrics.end(), [](const MetricSummary& m) { return m.ok(); });
}

std::pair<double, double> mean_std(const std::vector<double>& values) {
    if (values.empty()) return {0.0, 0.0};
    // Offsets from the first value keep identical repeats at exactly zero
    // spread and the mean at exactly that value.
    const double n = static_cast<double>(values.size());
    const double pivot = values.front();
    double shift = 0.0;
    for (double v : values) shift += v - pivot;
    shift /= n;
    double ss = 0.0;
    for (double v : values) ss += (v - pivot - shift) * (v - pivot - shift);
    return {pivot + shift, std::sqrt(ss / n)};
}

namespace {

template <class F>
auto with_file(const std::filesystem::path& path, F&& load) {
    try {
        return load();
    } catch (const Error& e) {
        std::string_view what = e.what();
        const std::string prefix = std::string(errc_name(e.code())) + ": ";
        if (what.starts_with(prefix)) what.remove_prefix(prefix.size());
        throw Error(e.code(), path.string() + ": " + std::string(what));
    }
}

void add_warnings(Report& report, std::string_view metric, const std::vector<std::string>& warnings) {
    for (const std::string& w : warnings) {
        std::string line = std::string(metric) + ": " + w;
        if (std::find(report.warnings.begin(), report.warnings.end(), line) == report.warnings.end()) {
            report.warnings.push_back(std::move(line));
        }
    }
}

}  // namespace

Report run_eval(const EvalConfig& config, bool dump_gmm) {
    config.validate();
    Report report;
    report.config = config;

    const Schema schema = with_file(config.schema_path, [&] { return load_schema(config.schema_path); });
    const Table real = with_file(config.real_path, [&] { return load_table(config.real_path, schema); });
    const Table syn = with_file(config.syn_path, [&] { return load_table(config.syn_path, schema); });
    RuleSet rules;
    if (!config.rules_path.empty()) {
        rules = with_file(config.rules_path, [&] { return parse_rules(config.rules_path, schema); });
    }
    report.real_rows = real.row_count();
    report.syn_rows = syn.row_count();
    const std::size_t keep = config.subsample_fraction < 1.0
                                 ? std::max<std::size_t>(1, affected_rows(config.subsample_fraction, syn.row_count()))
                                 : syn.row_count();
    report.evaluated_rows = std::min(keep, syn.row_count());

    std::vector<MetricSummary> summaries;
    for (const std::string& m : config.metrics) summaries.push_back({m, {}, 0.0, 0.0, 0.0, {}});

    std::vector<ValidTupleSet> valid;
    bool valid_ready = false;

    for (std::size_t r = 0; r < config.repeats; ++r) {
        const std::uint64_t seed = config.base_seed + r;
        Table view;
        if (report.evaluated_rows < syn.row_count()) {
            const auto rows = sample_rows(syn.row_count(), report.evaluated_rows, seed);
            view = syn.select(rows);
        } else {
            view = syn;
        }
        const bool first = r == 0;

        for (MetricSummary& s : summaries) {
            if (!s.ok()) continue;
            const auto start = std::chrono::steady_clock::now();
            try {
                double value = 0.0;
                if (s.metric == "hcs") {
                    if (rules.groups.empty()) throw Error(Errc::InvalidArgument, "rules define no consistency group");
                    if (!valid_ready) {
                        for (const ConsistencyGroup& g : rules.groups) valid.push_back(resolve_valid_tuples(real, g));
                        valid_ready = true;
                    }
                    const HcsResult h = hcs(view, rules.groups, valid);
                    value = h.overall;
                    if (first) {
                        for (const auto& [name, g] : h.per_group) report.breakdown["hcs/" + name] = g.score;
                        for (const GroupViolation& v : h.violations) {
                            report.violations.push_back({"hcs", v.group, v.row, "invalid", v.tuple});
                        }
                    }
                } else if (s.metric == "mdi") {
                    if (rules.rules.empty()) throw Error(Errc::InvalidArgument, "rules define no dependency rule");
                    const MdiResult d = mdi(view, rules.rules);
                    value = d.overall;
                    if (first) {
                        for (const auto& [name, g] : d.per_rule) report.breakdown["mdi/" + name] = g.score;
                        for (const RuleViolation& v : d.violations) {
                            std::vector<std::string> values;
                            for (const auto& [col, val] : v.witnessed) values.push_back(col + "=" + val);
                            report.violations.push_back({"mdi", v.rule, v.row,
                                                         std::string(truth_name(v.verdict)), std::move(values)});
                        }
                    }
                } else if (s.metric == "dsi") {
                    DsiOptions opts;
                    opts.encode_categorical = config.dsi_encode_categorical;
                    opts.gmm = config.gmm;
                    opts.gmm.seed = seed;
                    const DsiResult d = dsi(real, view, opts);
                    value = d.overall;
                    if (first) {
                        report.breakdown["dsi/reference_loglik"] = d.reference_loglik;
                        report.breakdown["dsi/term_min"] = d.term_min;
                        report.breakdown["dsi/term_max"] = d.term_max;
                        report.breakdown["dsi/real_rows_dropped"] = static_cast<double>(d.real_rows_dropped);
                        report.breakdown["dsi/syn_rows_dropped"] = static_cast<double>(d.syn_rows_dropped);
                        report.breakdown["dsi/iterations"] = static_cast<double>(d.iterations);
                        add_warnings(report, "dsi", d.warnings);
                        if (dump_gmm) report.gmm_dump = gmm_to_json(d.model);
                    }
                } else {
                    BaselineResult b;
                    if (s.metric == "density") {
                        value = density_score(real, view, &b);
                    } else if (s.metric == "correlation") {
                        value = correlation_score(real, view, &b);
                    } else {
                        value = coverage_score(real, view, &b);
                    }
                    if (first) {
                        for (const auto& [name, c] : b.per_column) {
                            report.breakdown[s.metric + "/" + name] = s.metric == "density" ? c.density : c.coverage;
                        }
                        for (const PairAssociation& p : b.per_pair) {
                            report.breakdown["correlation/" + p.first + "~" + p.second] =
                                100.0 * (1.0 - std::fabs(p.real - p.syn) / 2.0);
                        }
                        add_warnings(report, s.metric, b.warnings);
                    }
                }
                s.values.push_back(value);
            } catch (const std::exception& e) {
                s.error = e.what();
            }
            s.seconds += std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        }
    }
    for (MetricSummary& s : summaries) std::tie(s.mean, s.std) = mean_std(s.values);
    report.metrics = std::move(summaries);
    return report;
}

namespace {

std::string_view covariance_name(CovarianceKind k) { return k == CovarianceKind::Full ? "full" : "diagonal"; }
std::string_view init_name(InitMethod m) { return m == InitMethod::Random ? "random" : "kmeans_pp"; }

ordered_json config_json(const EvalConfig& c) {
    ordered_json j;
    j["real"] = c.real_path.generic_string();
    j["synthetic"] = c.syn_path.generic_string();
    j["schema"] = c.schema_path.generic_string();
    j["rules"] = c.rules_path.generic_string();
    j["repeats"] = c.repeats;
    j["subsample_fraction"] = c.subsample_fraction;
    j["base_seed"] = c.base_seed;
    j["metrics"] = c.metrics;
    j["dsi_encode_categorical"] = c.dsi_encode_categorical;
    j["gmm"] = {{"n_components", c.gmm.n_components},
                {"covariance", covariance_name(c.gmm.covariance)},
                {"max_iters", c.gmm.max_iters},
                {"rel_tol", c.gmm.rel_tol},
                {"cov_regularization", c.gmm.cov_regularization},
                {"init", init_name(c.gmm.init)},
                {"seed", c.gmm.seed}};
    return j;
}

EvalConfig config_from(const ordered_json& j) {
    EvalConfig c;
    c.real_path = j.at("real").get<std::string>();
    c.syn_path = j.at("synthetic").get<std::string>();
    c.schema_path = j.at("schema").get<std::string>();
    c.rules_path = j.at("rules").get<std::string>();
    c.repeats = j.at("repeats").get<std::size_t>();
    c.subsample_fraction = j.at("subsample_fraction").get<double>();
    c.base_seed = j.at("base_seed").get<std::uint64_t>();
    c.metrics = j.at("metrics").get<std::vector<std::string>>();
    c.dsi_encode_categorical = j.at("dsi_encode_categorical").get<bool>();
    const ordered_json& g = j.at("gmm");
    c.gmm.n_components = g.at("n_components").get<std::size_t>();
    c.gmm.covariance = g.at("covariance").get<std::string>() == "full" ? CovarianceKind::Full : CovarianceKind::Diagonal;
    c.gmm.max_iters = g.at("max_iters").get<std::size_t>();
    c.gmm.rel_tol = g.at("rel_tol").get<double>();
    c.gmm.cov_regularization = g.at("cov_regularization").get<double>();
    c.gmm.init = g.at("init").get<std::string>() == "random" ? InitMethod::Random : InitMethod::KMeansPlusPlus;
    c.gmm.seed = g.at("seed").get<std::uint64_t>();
    return c;
}

std::string fixed2(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    std::string s = buf;
    if (s == "-0.00") s = "0.00";
    return s;
}

}  // namespace

std::string emit_report(const Report& report, ReportFormat format, bool timing) {
    if (format == ReportFormat::Text) {
        std::string out;
        for (const MetricSummary& m : report.metrics) {
            if (m.ok()) {
                out += metric_label(m.metric) + " " + fixed2(m.mean) + "±" + fixed2(m.std) + "\n";
            } else {
                out += metric_label(m.metric) + " failed: " + m.error + "\n";
            }
        }
        return out;
    }
    ordered_json j;
    j["format_version"] = 1;
    j["config"] = config_json(report.config);
    j["rows"] = {{"real", report.real_rows}, {"synthetic", report.syn_rows}, {"evaluated", report.evaluated_rows}};
    j["complete"] = report.complete();
    ordered_json metrics = ordered_json::array();
    for (const MetricSummary& m : report.metrics) {
        ordered_json e;
        e["metric"] = m.metric;
        e["ok"] = m.ok();
        e["mean"] = m.mean;
        e["std"] = m.std;
        e["values"] = m.values;
        if (!m.ok()) e["error"] = m.error;
        if (timing) e["seconds"] = m.seconds;
        metrics.push_back(std::move(e));
    }
    j["metrics"] = std::move(metrics);
    j["breakdown"] = ordered_json::object();
    for (const auto& [k, v] : report.breakdown) j["breakdown"][k] = v;
    ordered_json violations = ordered_json::array();
    for (const ViolationSample& v : report.violations) {
        violations.push_back(
            {{"metric", v.metric}, {"target", v.target}, {"row", v.row}, {"verdict", v.verdict}, {"values", v.values}});
    }
    j["violations"] = std::move(violations);
    j["warnings"] = report.warnings;
    if (report.gmm_dump) j["gmm"] = ordered_json::parse(*report.gmm_dump);
    return j.dump(2) + "\n";
}

Report report_from_json(std::string_view text) {
    try {
        const ordered_json j = ordered_json::parse(text);
        Report r;
        r.config = config_from(j.at("config"));
        r.real_rows = j.at("rows").at("real").get<std::size_t>();
        r.syn_rows = j.at("rows").at("synthetic").get<std::size_t>();
        r.evaluated_rows = j.at("rows").at("evaluated").get<std::size_t>();
        for (const ordered_json& e : j.at("metrics")) {
            MetricSummary m;
            m.metric = e.at("metric").get<std::string>();
            m.values = e.at("values").get<std::vector<double>>();
            m.mean = e.at("mean").get<double>();
            m.std = e.at("std").get<double>();
            m.seconds = e.value("seconds", 0.0);
            m.error = e.value("error", std::string{});
            r.metrics.push_back(std::move(m));
        }
        for (const auto& [k, v] : j.at("breakdown").items()) r.breakdown[k] = v.get<double>();
        for (const ordered_json& v : j.at("violations")) {
            r.violations.push_back({v.at("metric").get<std::string>(), v.at("target").get<std::string>(),
                                    v.at("row").get<std::size_t>(), v.at("verdict").get<std::string>(),
                                    v.at("values").get<std::vector<std::string>>()});
        }
        r.warnings = j.at("warnings").get<std::vector<std::string>>();
        if (j.contains("gmm")) r.gmm_dump = j.at("gmm").dump(2);
        return r;
    } catch (const nlohmann::json::exception& e) {
        throw Error(Errc::ParseError, std::string("report JSON: ") + e.what());
    }
}

}  // namespace tabcheck
