#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace tabcheck {

enum class CovarianceKind { Full, Diagonal };
enum class InitMethod { KMeansPlusPlus, Random };

struct GmmConfig {
    std::size_t n_components = 10;
    CovarianceKind covariance = CovarianceKind::Diagonal;
    std::size_t max_iters = 200;
    double rel_tol = 1e-6;
    /// Added to every covariance diagonal in each M-step. Zero disables
    /// regularization, in which case a singular covariance is an error.
    double cov_regularization = 1e-6;
    InitMethod init = InitMethod::KMeansPlusPlus;
    std::uint64_t seed = 0;

    /// Throws InvalidArgument.
    void validate() const;
    bool operator==(const GmmConfig&) const = default;
};

/// Per-column affine map x -> (x - mean) / scale.
struct Standardizer {
    Eigen::VectorXd mean;
    Eigen::VectorXd scale;

    static Standardizer identity(std::size_t dim);
    Eigen::VectorXd apply(std::span<const double> raw) const;
};

struct GaussianComponent {
    double weight = 0.0;
    Eigen::VectorXd mean;
    Eigen::MatrixXd covariance;  // diagonal kind keeps off-diagonals at zero

    // Derived by GmmModel::prepare(): lower Cholesky factor (or per-axis
    // standard deviations for the diagonal kind) and the log normalizer
    // log(weight) - d/2 log(2 pi) - 1/2 log|covariance|.
    Eigen::MatrixXd chol;
    Eigen::VectorXd inv_std;
    double log_norm = 0.0;
};

struct GmmModel {
    CovarianceKind covariance = CovarianceKind::Diagonal;
    std::size_t dim = 0;
    std::vector<GaussianComponent> components;
    Standardizer standardizer;
    std::vector<std::string> column_names;

    /// Recomputes the cached factors. Throws SingularCovariance.
    void prepare();
};

/// log sum_k weight_k N(row | mean_k, cov_k), stabilized with log-sum-exp.
/// `row` lives in the model's fitting space (already standardized).
/// Throws DimensionMismatch.
double loglik(const GmmModel& model, std::span<const double> row);

/// Sum of loglik over the rows of `data`, in row order.
double total_loglik(const GmmModel& model, const Eigen::MatrixXd& data);

struct GmmFit {
    GmmModel model;
    /// Total log-likelihood of the data under the parameters of each
    /// iteration, starting with the initialization.
    std::vector<double> loglik_history;
    std::size_t iterations = 0;
    bool converged = false;
};

/// Expectation-maximization on the rows of `data` (one sample per row).
/// Stops when the relative change of the total log-likelihood drops below
/// rel_tol or after max_iters M-steps.
/// Throws DegenerateData, SingularCovariance, InvalidArgument.
GmmFit fit_gmm(const Eigen::MatrixXd& data, const GmmConfig& config);

/// Audit dump: weights, means, covariances, standardizer.
std::string gmm_to_json(const GmmModel& model);

}  // namespace tabcheck
