#include "tabcheck/gmm.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include <json.hpp>

#include "tabcheck/error.hpp"
#include "tabcheck/parallel.hpp"

namespace tabcheck {

void GmmConfig::validate() const {
    if (n_components == 0) throw Error(Errc::InvalidArgument, "n_components must be positive");
    if (max_iters == 0) throw Error(Errc::InvalidArgument, "max_iters must be positive");
    if (!(rel_tol > 0.0)) throw Error(Errc::InvalidArgument, "rel_tol must be positive");
    if (!(cov_regularization >= 0.0) || !std::isfinite(cov_regularization)) {
        throw Error(Errc::InvalidArgument, "cov_regularization must be nonnegative");
    }
}

Standardizer Standardizer::identity(std::size_t dim) {
    return {Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dim)),
            Eigen::VectorXd::Ones(static_cast<Eigen::Index>(dim))};
}

Eigen::VectorXd Standardizer::apply(std::span<const double> raw) const {
    if (static_cast<Eigen::Index>(raw.size()) != mean.size()) {
        throw Error(Errc::DimensionMismatch, "row has " + std::to_string(raw.size()) + " values, standardizer " +
                                                 std::to_string(mean.size()));
    }
    Eigen::VectorXd out(mean.size());
    for (Eigen::Index j = 0; j < mean.size(); ++j) out[j] = (raw[static_cast<std::size_t>(j)] - mean[j]) / scale[j];
    return out;
}

namespace {

constexpr double kLog2Pi = 1.8378770664093454835606594728112;  // log(2 pi)
constexpr double kWeightFloor = 10 * DBL_EPSILON;

// Squared Mahalanobis distance of x to the component, using the cached factor.
double mahalanobis(const GaussianComponent& c, CovarianceKind kind, const double* x, Eigen::VectorXd& scratch) {
    const Eigen::Index d = c.mean.size();
    if (kind == CovarianceKind::Diagonal) {
        double acc = 0.0;
        for (Eigen::Index j = 0; j < d; ++j) {
            const double z = (x[j] - c.mean[j]) * c.inv_std[j];
            acc += z * z;
        }
        return acc;
    }
    // Forward substitution L y = x - mean.
    double acc = 0.0;
    for (Eigen::Index i = 0; i < d; ++i) {
        double s = x[i] - c.mean[i];
        for (Eigen::Index k = 0; k < i; ++k) s -= c.chol(i, k) * scratch[k];
        scratch[i] = s / c.chol(i, i);
        acc += scratch[i] * scratch[i];
    }
    return acc;
}

// Fills lp with per-component log(weight * density) and returns their log-sum-exp.
double component_logs(const GmmModel& model, const double* x, std::vector<double>& lp, Eigen::VectorXd& scratch) {
    const std::size_t k = model.components.size();
    lp.resize(k);
    double peak = -std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < k; ++c) {
        const GaussianComponent& comp = model.components[c];
        lp[c] = comp.log_norm - 0.5 * mahalanobis(comp, model.covariance, x, scratch);
        peak = std::max(peak, lp[c]);
    }
    if (!std::isfinite(peak)) return peak;
    double sum = 0.0;
    for (double v : lp) sum += std::exp(v - peak);
    return peak + std::log(sum);
}

// Row-major copy so each sample is contiguous.
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct EStep {
    double total = 0.0;
    Eigen::MatrixXd resp;  // n x K
};

EStep expectation(const GmmModel& model, const RowMatrix& x) {
    const auto n = static_cast<std::size_t>(x.rows());
    const std::size_t k = model.components.size();
    EStep out;
    out.resp.resize(x.rows(), static_cast<Eigen::Index>(k));
    std::vector<double> row_ll(n);
    parallel_for(n, [&](std::size_t begin, std::size_t end) {
        std::vector<double> lp;
        Eigen::VectorXd scratch(static_cast<Eigen::Index>(model.dim));
        for (std::size_t i = begin; i < end; ++i) {
            const double lse = component_logs(model, x.row(static_cast<Eigen::Index>(i)).data(), lp, scratch);
            row_ll[i] = lse;
            for (std::size_t c = 0; c < k; ++c) {
                out.resp(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) =
                    std::isfinite(lse) ? std::exp(lp[c] - lse) : 1.0 / static_cast<double>(k);
            }
        }
    });
    for (double v : row_ll) out.total += v;
    return out;
}

GmmModel maximization(const RowMatrix& x, const Eigen::MatrixXd& resp, const GmmModel& previous,
                      const GmmConfig& config) {
    const Eigen::Index n = x.rows();
    const Eigen::Index d = x.cols();
    const std::size_t k = static_cast<std::size_t>(resp.cols());
    GmmModel model;
    model.covariance = config.covariance;
    model.dim = static_cast<std::size_t>(d);
    model.standardizer = previous.standardizer;
    model.column_names = previous.column_names;
    model.components.resize(k);

    double weight_total = 0.0;
    for (std::size_t c = 0; c < k; ++c) {
        const auto ci = static_cast<Eigen::Index>(c);
        GaussianComponent& comp = model.components[c];
        const double nk = resp.col(ci).sum();
        comp.weight = nk + kWeightFloor;
        weight_total += comp.weight;
        if (!(nk > std::numeric_limits<double>::min() * 1e10) && !previous.components.empty()) {
            // No mass left: keep the previous location and shape.
            comp.mean = previous.components[c].mean;
            comp.covariance = previous.components[c].covariance;
            continue;
        }
        comp.mean = (resp.col(ci).transpose() * x).transpose() / nk;
        const Eigen::MatrixXd diff = x.rowwise() - comp.mean.transpose();
        if (config.covariance == CovarianceKind::Full) {
            const Eigen::MatrixXd weighted = diff.array().colwise() * resp.col(ci).array();
            comp.covariance = (weighted.transpose() * diff) / nk;
            comp.covariance = 0.5 * (comp.covariance + comp.covariance.transpose());
        } else {
            comp.covariance = Eigen::MatrixXd::Zero(d, d);
            for (Eigen::Index j = 0; j < d; ++j) {
                comp.covariance(j, j) = (diff.col(j).array().square() * resp.col(ci).array()).sum() / nk;
            }
        }
        comp.covariance.diagonal().array() += config.cov_regularization;
    }
    for (GaussianComponent& comp : model.components) comp.weight /= weight_total;
    (void)n;
    model.prepare();
    return model;
}

Eigen::MatrixXd hard_responsibilities(const std::vector<std::size_t>& labels, std::size_t k) {
    Eigen::MatrixXd resp = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(labels.size()), static_cast<Eigen::Index>(k));
    for (std::size_t i = 0; i < labels.size(); ++i) {
        resp(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(labels[i])) = 1.0;
    }
    return resp;
}

double squared_distance(const RowMatrix& x, Eigen::Index i, const Eigen::VectorXd& center) {
    return (x.row(i).transpose() - center).squaredNorm();
}

// k-means++ seeding followed by a bounded number of Lloyd rounds.
std::vector<std::size_t> kmeans_labels(const RowMatrix& x, std::size_t k, std::mt19937_64& rng,
                                       std::vector<Eigen::VectorXd>& centers) {
    const auto n = static_cast<std::size_t>(x.rows());
    centers.clear();
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    centers.push_back(x.row(static_cast<Eigen::Index>(pick(rng))).transpose());
    std::vector<double> dist(n);
    for (std::size_t i = 0; i < n; ++i) dist[i] = squared_distance(x, static_cast<Eigen::Index>(i), centers[0]);
    while (centers.size() < k) {
        double total = 0.0;
        for (double v : dist) total += v;
        std::size_t chosen = 0;
        if (total > 0.0) {
            const double u = std::uniform_real_distribution<double>(0.0, total)(rng);
            double acc = 0.0;
            chosen = n - 1;
            for (std::size_t i = 0; i < n; ++i) {
                acc += dist[i];
                if (u < acc) {
                    chosen = i;
                    break;
                }
            }
        } else {
            chosen = pick(rng);
        }
        centers.push_back(x.row(static_cast<Eigen::Index>(chosen)).transpose());
        for (std::size_t i = 0; i < n; ++i) {
            dist[i] = std::min(dist[i], squared_distance(x, static_cast<Eigen::Index>(i), centers.back()));
        }
    }

    std::vector<std::size_t> labels(n, 0);
    constexpr int kLloydRounds = 20;
    for (int round = 0; round < kLloydRounds; ++round) {
        bool changed = false;
        for (std::size_t i = 0; i < n; ++i) {
            std::size_t best = 0;
            double best_d = std::numeric_limits<double>::infinity();
            for (std::size_t c = 0; c < k; ++c) {
                const double dd = squared_distance(x, static_cast<Eigen::Index>(i), centers[c]);
                if (dd < best_d) {
                    best_d = dd;
                    best = c;
                }
            }
            if (labels[i] != best || round == 0) changed = changed || labels[i] != best || round == 0;
            labels[i] = best;
        }
        if (!changed) break;
        std::vector<Eigen::VectorXd> sums(k, Eigen::VectorXd::Zero(x.cols()));
        std::vector<std::size_t> counts(k, 0);
        for (std::size_t i = 0; i < n; ++i) {
            sums[labels[i]] += x.row(static_cast<Eigen::Index>(i)).transpose();
            ++counts[labels[i]];
        }
        for (std::size_t c = 0; c < k; ++c) {
            if (counts[c] > 0) centers[c] = sums[c] / static_cast<double>(counts[c]);
        }
    }
    return labels;
}

// Starting parameters: a fallback component per center (global covariance)
// that the first M-step uses for any component left without members.
GmmModel fallback_model(const RowMatrix& x, const std::vector<Eigen::VectorXd>& centers, const GmmConfig& config) {
    const Eigen::Index d = x.cols();
    const Eigen::VectorXd mean = x.colwise().mean().transpose();
    const Eigen::MatrixXd diff = x.rowwise() - mean.transpose();
    Eigen::MatrixXd cov = (diff.transpose() * diff) / static_cast<double>(x.rows());
    if (config.covariance == CovarianceKind::Diagonal) cov = Eigen::MatrixXd(cov.diagonal().asDiagonal());
    cov.diagonal().array() += config.cov_regularization;
    GmmModel m;
    m.covariance = config.covariance;
    m.dim = static_cast<std::size_t>(d);
    for (const Eigen::VectorXd& c : centers) m.components.push_back({0.0, c, cov, {}, {}, 0.0});
    return m;
}

}  // namespace

void GmmModel::prepare() {
    for (GaussianComponent& c : components) {
        const Eigen::Index d = c.mean.size();
        if (!(c.weight > 0.0)) throw Error(Errc::DegenerateData, "component weight must be positive");
        double log_det = 0.0;
        if (covariance == CovarianceKind::Diagonal) {
            c.inv_std.resize(d);
            for (Eigen::Index j = 0; j < d; ++j) {
                const double v = c.covariance(j, j);
                if (!(v > 0.0) || !std::isfinite(v)) {
                    throw Error(Errc::SingularCovariance, "non-positive variance on axis " + std::to_string(j));
                }
                c.inv_std[j] = 1.0 / std::sqrt(v);
                log_det += std::log(v);
            }
        } else {
            Eigen::LLT<Eigen::MatrixXd> llt(c.covariance);
            if (llt.info() != Eigen::Success) {
                throw Error(Errc::SingularCovariance, "covariance is not positive definite");
            }
            c.chol = llt.matrixL();
            for (Eigen::Index j = 0; j < d; ++j) {
                if (!(c.chol(j, j) > 0.0)) throw Error(Errc::SingularCovariance, "covariance is singular");
                log_det += 2.0 * std::log(c.chol(j, j));
            }
        }
        c.log_norm = std::log(c.weight) - 0.5 * (static_cast<double>(d) * kLog2Pi + log_det);
    }
}

double loglik(const GmmModel& model, std::span<const double> row) {
    if (row.size() != model.dim) {
        throw Error(Errc::DimensionMismatch,
                    "row has " + std::to_string(row.size()) + " values, model has " + std::to_string(model.dim));
    }
    std::vector<double> lp;
    Eigen::VectorXd scratch(static_cast<Eigen::Index>(model.dim));
    return component_logs(model, row.data(), lp, scratch);
}

double total_loglik(const GmmModel& model, const Eigen::MatrixXd& data) {
    const RowMatrix x = data;
    double total = 0.0;
    std::vector<double> lp;
    Eigen::VectorXd scratch(static_cast<Eigen::Index>(model.dim));
    for (Eigen::Index i = 0; i < x.rows(); ++i) total += component_logs(model, x.row(i).data(), lp, scratch);
    return total;
}

GmmFit fit_gmm(const Eigen::MatrixXd& data, const GmmConfig& config) {
    config.validate();
    const auto n = static_cast<std::size_t>(data.rows());
    const std::size_t k = config.n_components;
    if (data.cols() == 0) throw Error(Errc::DegenerateData, "no columns to fit");
    if (n < k) {
        throw Error(Errc::DegenerateData,
                    std::to_string(n) + " rows cannot support " + std::to_string(k) + " components");
    }
    if (!data.allFinite()) throw Error(Errc::DegenerateData, "data contains non-finite values");

    const RowMatrix x = data;
    std::mt19937_64 rng(config.seed);

    std::vector<Eigen::VectorXd> centers;
    Eigen::MatrixXd resp;
    if (config.init == InitMethod::KMeansPlusPlus) {
        resp = hard_responsibilities(kmeans_labels(x, k, rng, centers), k);
    } else {
        std::uniform_real_distribution<double> u(0.0, 1.0);
        resp.resize(x.rows(), static_cast<Eigen::Index>(k));
        for (Eigen::Index i = 0; i < x.rows(); ++i) {
            for (Eigen::Index c = 0; c < resp.cols(); ++c) resp(i, c) = u(rng) + 1e-12;
            resp.row(i) /= resp.row(i).sum();
        }
        std::uniform_int_distribution<std::size_t> pick(0, n - 1);
        for (std::size_t c = 0; c < k; ++c) centers.push_back(x.row(static_cast<Eigen::Index>(pick(rng))).transpose());
    }

    GmmFit fit;
    GmmModel seed_model = fallback_model(x, centers, config);
    seed_model.standardizer = Standardizer::identity(static_cast<std::size_t>(x.cols()));
    fit.model = maximization(x, resp, seed_model, config);

    for (std::size_t iter = 0;; ++iter) {
        EStep e = expectation(fit.model, x);
        fit.loglik_history.push_back(e.total);
        if (iter > 0) {
            const double prev = fit.loglik_history[iter - 1];
            if (std::fabs(e.total - prev) <= config.rel_tol * std::fabs(prev)) {
                fit.converged = true;
                break;
            }
        }
        if (iter == config.max_iters) break;
        fit.model = maximization(x, e.resp, fit.model, config);
        fit.iterations = iter + 1;
    }
    return fit;
}

std::string gmm_to_json(const GmmModel& model) {
    using nlohmann::ordered_json;
    auto vec = [](const Eigen::VectorXd& v) {
        std::vector<double> out(v.data(), v.data() + v.size());
        return out;
    };
    ordered_json j;
    j["covariance_kind"] = model.covariance == CovarianceKind::Full ? "full" : "diagonal";
    j["dim"] = model.dim;
    j["columns"] = model.column_names;
    j["standardizer"] = {{"mean", vec(model.standardizer.mean)}, {"scale", vec(model.standardizer.scale)}};
    ordered_json comps = ordered_json::array();
    for (const GaussianComponent& c : model.components) {
        ordered_json cov = ordered_json::array();
        for (Eigen::Index r = 0; r < c.covariance.rows(); ++r) cov.push_back(vec(c.covariance.row(r).transpose()));
        comps.push_back({{"weight", c.weight}, {"mean", vec(c.mean)}, {"covariance", cov}});
    }
    j["components"] = comps;
    return j.dump(2);
}

}  // namespace tabcheck
