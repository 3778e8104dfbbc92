#include "tabcheck/dsi.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "column_util.hpp"
#include "tabcheck/error.hpp"
#include "tabcheck/parallel.hpp"

namespace tabcheck {

namespace {

struct Feature {
    std::string name;
    std::size_t real_index = 0;
    std::size_t syn_index = 0;
    bool categorical = false;
    std::map<std::string, double> frequency;  // categorical only
};

std::vector<Feature> select_features(const Table& real, const Table& syn, const DsiOptions& options) {
    std::vector<std::string> names = options.columns;
    if (names.empty()) {
        for (const Column& c : real.schema().columns()) {
            if (is_numeric(c.kind) || (options.encode_categorical && c.kind == ColumnKind::Categorical)) {
                names.push_back(c.name);
            }
        }
    }
    std::vector<Feature> out;
    for (const std::string& name : names) {
        Feature f;
        f.name = name;
        f.real_index = real.schema().require(name);
        const auto syn_index = syn.schema().index_of(name);
        const Column& rc = real.schema().column(f.real_index);
        if (!syn_index || syn.schema().column(*syn_index).kind != rc.kind) {
            throw Error(Errc::SchemaMismatch, "synthetic table lacks " + std::string(kind_name(rc.kind)) +
                                                  " column '" + name + "'");
        }
        f.syn_index = *syn_index;
        if (rc.kind == ColumnKind::Categorical) {
            if (!options.encode_categorical) {
                throw Error(Errc::TypeError, "column '" + name + "' is categorical; enable frequency encoding");
            }
            f.categorical = true;
            std::size_t n = 0;
            for (std::size_t r = 0; r < real.row_count(); ++r) {
                if (const auto* s = std::get_if<std::string>(&real.cell(r, f.real_index))) {
                    f.frequency[*s] += 1.0;
                    ++n;
                }
            }
            for (auto& [k, v] : f.frequency) v /= static_cast<double>(n);
        }
        out.push_back(std::move(f));
    }
    return out;
}

double feature_value(const Feature& f, const Value& v) {
    if (!f.categorical) return ordinal(v);
    const auto* s = std::get_if<std::string>(&v);
    if (!s) return std::numeric_limits<double>::quiet_NaN();
    const auto it = f.frequency.find(*s);
    return it == f.frequency.end() ? 0.0 : it->second;
}

// Standardized complete rows; `dropped` counts rows with a missing value.
Eigen::MatrixXd build_matrix(const Table& t, const std::vector<Feature>& features, bool real_side,
                             const Standardizer& st, std::size_t& dropped) {
    std::vector<double> buf;
    std::size_t kept = 0;
    dropped = 0;
    for (std::size_t r = 0; r < t.row_count(); ++r) {
        bool complete = true;
        for (std::size_t j = 0; j < features.size(); ++j) {
            const double x = feature_value(features[j], t.cell(r, real_side ? features[j].real_index
                                                                            : features[j].syn_index));
            if (!std::isfinite(x)) {
                complete = false;
                break;
            }
        }
        if (!complete) {
            ++dropped;
            continue;
        }
        for (std::size_t j = 0; j < features.size(); ++j) {
            const double x = feature_value(features[j], t.cell(r, real_side ? features[j].real_index
                                                                            : features[j].syn_index));
            const auto ji = static_cast<Eigen::Index>(j);
            buf.push_back((x - st.mean[ji]) / st.scale[ji]);
        }
        ++kept;
    }
    Eigen::MatrixXd m(static_cast<Eigen::Index>(kept), static_cast<Eigen::Index>(features.size()));
    for (std::size_t r = 0; r < kept; ++r) {
        for (std::size_t j = 0; j < features.size(); ++j) {
            m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j)) = buf[r * features.size() + j];
        }
    }
    return m;
}

std::vector<double> row_logliks(const GmmModel& model, const Eigen::MatrixXd& x) {
    const auto n = static_cast<std::size_t>(x.rows());
    std::vector<double> out(n);
    parallel_for(n, [&](std::size_t begin, std::size_t end) {
        std::vector<double> row(static_cast<std::size_t>(x.cols()));
        for (std::size_t i = begin; i < end; ++i) {
            for (std::size_t j = 0; j < row.size(); ++j) {
                row[j] = x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
            }
            out[i] = loglik(model, row);
        }
    });
    return out;
}

}  // namespace

DsiResult dsi(const Table& real, const Table& syn, const DsiOptions& options) {
    options.gmm.validate();
    DsiResult result;
    std::vector<Feature> features;
    Standardizer st;
    std::vector<double> means, scales;
    for (Feature& f : select_features(real, syn, options)) {
        std::vector<double> xs(real.row_count());
        for (std::size_t r = 0; r < real.row_count(); ++r) xs[r] = feature_value(f, real.cell(r, f.real_index));
        const Moments m = moments(xs);
        if (m.count == 0 || !(m.std > 0.0) || !std::isfinite(m.std)) {
            result.warnings.push_back("column '" + f.name + "' has zero variance in the real table; dropped");
            continue;
        }
        means.push_back(m.mean);
        scales.push_back(m.std);
        result.columns_used.push_back(f.name);
        features.push_back(std::move(f));
    }
    if (features.empty()) throw Error(Errc::DegenerateData, "no usable columns for the mixture model");
    st.mean = Eigen::Map<Eigen::VectorXd>(means.data(), static_cast<Eigen::Index>(means.size()));
    st.scale = Eigen::Map<Eigen::VectorXd>(scales.data(), static_cast<Eigen::Index>(scales.size()));

    const Eigen::MatrixXd x_real = build_matrix(real, features, true, st, result.real_rows_dropped);
    const Eigen::MatrixXd x_syn = build_matrix(syn, features, false, st, result.syn_rows_dropped);
    result.real_rows_used = static_cast<std::size_t>(x_real.rows());
    result.syn_rows_used = static_cast<std::size_t>(x_syn.rows());
    if (result.syn_rows_used == 0) throw Error(Errc::DegenerateData, "synthetic table has no complete rows");

    GmmFit fit = fit_gmm(x_real, options.gmm);
    fit.model.standardizer = st;
    fit.model.column_names = result.columns_used;
    result.iterations = fit.iterations;
    result.converged = fit.converged;

    double sum = 0.0;
    for (double v : row_logliks(fit.model, x_real)) sum += v;
    const double reference = sum / static_cast<double>(x_real.rows());
    result.reference_loglik = reference;

    const std::vector<double> ll = row_logliks(fit.model, x_syn);
    double term_sum = 0.0;
    result.term_min = 1.0;
    result.term_max = 0.0;
    for (double l : ll) {
        double term;
        if (reference == 0.0) {
            term = l == 0.0 ? 1.0 : 0.0;
        } else {
            term = 1.0 - std::fabs(l - reference) / std::fabs(reference);
            if (!(term > 0.0)) term = 0.0;  // also catches NaN from -inf
            if (term > 1.0) term = 1.0;
        }
        term_sum += term;
        result.term_min = std::min(result.term_min, term);
        result.term_max = std::max(result.term_max, term);
    }
    result.term_mean = term_sum / static_cast<double>(ll.size());
    result.overall = 100.0 * result.term_mean;
    result.model = std::move(fit.model);
    return result;
}

}  // namespace tabcheck
