// tabcheck: command-line front end for evaluation, rule validation,
// perturbation and SMOTE-style sampling.

#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "tabcheck/error.hpp"
#include "tabcheck/harness.hpp"
#include "tabcheck/report.hpp"
#include "tabcheck/rules.hpp"
#include "tabcheck/table.hpp"

namespace {

using namespace tabcheck;

constexpr int kExitPartial = 1;
constexpr int kExitInput = 2;

void write_output(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(Errc::IoError, "cannot write " + path);
    out << text;
    if (!out) throw Error(Errc::IoError, "write failed: " + path);
}

void write_table_output(const std::string& path, const Table& table) {
    std::ostringstream buf;
    write_table(buf, table);
    write_output(path, buf.str());
}

struct EvalArgs {
    EvalConfig config;
    std::string format = "json";
    std::string out;
    std::string gmm_dump;
    std::string covariance = "diagonal";
    std::string init = "kmeans_pp";
    bool no_timing = false;
};

int run_eval_command(EvalArgs& a) {
    a.config.gmm.covariance = a.covariance == "full" ? CovarianceKind::Full : CovarianceKind::Diagonal;
    a.config.gmm.init = a.init == "random" ? InitMethod::Random : InitMethod::KMeansPlusPlus;
    const Report report = run_eval(a.config, !a.gmm_dump.empty());
    const ReportFormat format = a.format == "text" ? ReportFormat::Text : ReportFormat::Json;
    write_output(a.out, emit_report(report, format, !a.no_timing));
    if (!a.gmm_dump.empty() && report.gmm_dump) write_output(a.gmm_dump, *report.gmm_dump + "\n");
    for (const std::string& w : report.warnings) std::cerr << "warning: " << w << '\n';
    if (report.complete()) return 0;
    for (const MetricSummary& m : report.metrics) {
        if (!m.ok()) std::cerr << "error: " << m.metric << " failed: " << m.error << '\n';
    }
    return kExitPartial;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Rule-based and distributional quality checks for synthetic tables"};
    app.require_subcommand(1);

    EvalArgs ev;
    CLI::App* eval = app.add_subcommand("eval", "Score a synthetic table against a real one");
    eval->add_option("--real", ev.config.real_path, "Real CSV")->required();
    eval->add_option("--syn", ev.config.syn_path, "Synthetic CSV")->required();
    eval->add_option("--schema", ev.config.schema_path, "Schema file")->required();
    eval->add_option("--rules", ev.config.rules_path, "Rule file (groups and dependency rules)");
    eval->add_option("--repeats", ev.config.repeats, "Number of repeats")->capture_default_str();
    eval->add_option("--seed", ev.config.base_seed, "Base seed; repeat r uses seed + r")->capture_default_str();
    eval->add_option("--subsample", ev.config.subsample_fraction, "Row fraction of the synthetic table per repeat")
        ->capture_default_str();
    eval->add_option("--metrics", ev.config.metrics, "Comma-separated subset of " + [] {
        std::string s;
        for (const std::string& m : kAllMetrics) s += (s.empty() ? "" : ",") + m;
        return s;
    }())->delimiter(',');
    eval->add_option("--format", ev.format, "Report format")->check(CLI::IsMember({"json", "text"}))
        ->capture_default_str();
    eval->add_option("--out", ev.out, "Report path (default stdout)");
    eval->add_flag("--no-timing", ev.no_timing, "Omit wall-clock timings from the JSON report");
    eval->add_option("--gmm-components", ev.config.gmm.n_components, "Mixture components")->capture_default_str();
    eval->add_option("--gmm-covariance", ev.covariance, "Covariance kind")
        ->check(CLI::IsMember({"full", "diagonal"}))->capture_default_str();
    eval->add_option("--gmm-init", ev.init, "Initialization")->check(CLI::IsMember({"kmeans_pp", "random"}))
        ->capture_default_str();
    eval->add_option("--gmm-max-iters", ev.config.gmm.max_iters, "EM iteration cap")->capture_default_str();
    eval->add_option("--gmm-tol", ev.config.gmm.rel_tol, "Relative log-likelihood tolerance")->capture_default_str();
    eval->add_option("--gmm-reg", ev.config.gmm.cov_regularization, "Covariance diagonal regularization")
        ->capture_default_str();
    eval->add_option("--gmm-dump", ev.gmm_dump, "Write the repeat-0 mixture model as JSON");
    eval->add_flag("--encode-categorical", ev.config.dsi_encode_categorical,
                   "Frequency-encode categorical columns for DSI");

    std::string schema_path, rules_path;
    CLI::App* validate = app.add_subcommand("validate-rules", "Parse and type-check a rule file");
    validate->add_option("--schema", schema_path, "Schema file")->required();
    validate->add_option("--rules", rules_path, "Rule file")->required();

    std::string input, out, kind, target;
    std::vector<std::string> columns;
    double fraction = 0.0, sigma = 1.0;
    std::uint64_t seed = 0;
    CLI::App* pert = app.add_subcommand("perturb", "Apply a seeded perturbation and write CSV");
    pert->add_option("--input", input, "Input CSV")->required();
    pert->add_option("--schema", schema_path, "Schema file")->required();
    pert->add_option("--rules", rules_path, "Rule file (for group and rule targets)");
    pert->add_option("--kind", kind, "Perturbation")
        ->check(CLI::IsMember({"corrupt-group", "break-rule", "shuffle-column", "gaussian-noise", "swap-dates"}))
        ->required();
    pert->add_option("--target", target, "Group, rule or column name");
    pert->add_option("--columns", columns, "Columns for gaussian-noise")->delimiter(',');
    pert->add_option("--fraction", fraction, "Share of rows to modify")->capture_default_str();
    pert->add_option("--sigma", sigma, "Noise standard deviation in column units")->capture_default_str();
    pert->add_option("--seed", seed, "Seed")->capture_default_str();
    pert->add_option("--out", out, "Output CSV (default stdout)");

    std::size_t samples = 0, k_neighbors = 5;
    CLI::App* smote = app.add_subcommand("smote", "Generate SMOTE-style samples and write CSV");
    smote->add_option("--input", input, "Real CSV")->required();
    smote->add_option("--schema", schema_path, "Schema file")->required();
    smote->add_option("--samples", samples, "Number of rows to generate")->required();
    smote->add_option("--k", k_neighbors, "Neighbors")->capture_default_str();
    smote->add_option("--seed", seed, "Seed")->capture_default_str();
    smote->add_option("--out", out, "Output CSV (default stdout)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*eval) return run_eval_command(ev);
        const Schema schema = load_schema(schema_path);
        RuleSet rules;
        if (!rules_path.empty()) rules = parse_rules(rules_path, schema);
        if (*validate) {
            std::cout << rules.groups.size() << " groups, " << rules.rules.size() << " rules\n";
            for (const ConsistencyGroup& g : rules.groups) {
                std::cout << "group " << g.name << ":";
                for (const std::string& c : g.columns) std::cout << ' ' << c;
                std::cout << '\n';
            }
            for (const DependencyRule& r : rules.rules) {
                std::cout << "rule " << r.name << ": " << to_string(r.expr) << " (tolerance " << r.tolerance << ")\n";
            }
            return 0;
        }
        const Table table = load_table(input, schema);
        if (*smote) {
            write_table_output(out, smote_like(table, samples, k_neighbors, seed));
            return 0;
        }
        Perturbation p;
        p.seed = seed;
        if (kind == "corrupt-group") {
            p.kind = CorruptGroup{target, fraction};
        } else if (kind == "break-rule") {
            p.kind = BreakRule{target, fraction};
        } else if (kind == "swap-dates") {
            p.kind = SwapDates{target, fraction};
        } else if (kind == "shuffle-column") {
            p.kind = ShuffleColumn{target};
        } else {
            p.kind = GaussianNoise{columns, sigma};
        }
        write_table_output(out, perturb(table, p, rules));
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitInput;
    }
}
