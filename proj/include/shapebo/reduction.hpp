#pragma once

#include <vector>

#include "shapebo/gp.hpp"

namespace shapebo {

struct SelectOptions {
    double lambda_override = -1.0;  // < 0: lambda = n / d'
    double threshold_factor = 10.0; // active iff theta_j/range_j <= factor * min
    bool use_domain_range = false;  // normalize by a domain box instead of the sample range
    Eigen::VectorXd domain_lo, domain_hi;
    FitOptions fit;
};

struct ActiveSet {
    std::vector<int> indices;         // 0-based, sorted ascending
    Eigen::VectorXd theta;            // fitted lengthscales of the selection GP
    Eigen::VectorXd ranges;           // normalizing ranges
    Eigen::VectorXd normalized_theta; // theta_j / range_j
    bool degenerate = false;          // zero-variance outputs

    [[nodiscard]] int count() const { return static_cast<int>(indices.size()); }
};

/// L1-penalized likelihood selection of active eigencomponents: fits a full
/// anisotropic GP over all d' coordinates (inputs not normalized) and
/// declares dimension j active iff theta_j/range_j <= 10 x the minimum.
ActiveSet select_active(const Eigen::MatrixXd& alphas, const Eigen::VectorXd& y,
                        const SelectOptions& opts = {});

/// Additive GP Y = beta + Y_a(alpha_a) + Y_inactive(alpha_inactive) with an
/// anisotropic kernel on the active block and an isotropic one on the rest;
/// delta + 3 hyperparameters total.
struct AdditiveGpModel {
    std::vector<int> active;
    std::vector<int> inactive;
    KernelSpec kernel_a; // anisotropic, variance sigma2_a
    KernelSpec kernel_i; // isotropic, variance sigma2_inactive (0 when inactive is empty)
    double beta_hat = 0.0;
    double jitter_rel = 0.0;
    Eigen::MatrixXd inputs; // n x d'
    Eigen::VectorXd outputs;

    Eigen::MatrixXd inputs_active;   // n x delta
    Eigen::MatrixXd inputs_inactive; // n x (d' - delta)
    Eigen::LLT<Eigen::MatrixXd> chol; // of K = K_a + K_inactive + jitter
    Eigen::VectorXd kinv_resid;       // K^-1 (y - 1 beta)
    double loglik = 0.0;

    [[nodiscard]] int n() const { return static_cast<int>(inputs.rows()); }
    [[nodiscard]] int dim() const { return static_cast<int>(inputs.cols()); }
    [[nodiscard]] double total_variance() const {
        return kernel_a.variance + kernel_i.variance;
    }
};

AdditiveGpModel fit_additive(const Eigen::MatrixXd& alphas, const Eigen::VectorXd& y,
                             const ActiveSet& active, const FitOptions& opts = {});

/// Rebuild the cached factorization from explicit hyperparameters.
AdditiveGpModel make_additive(const Eigen::MatrixXd& alphas, const Eigen::VectorXd& y,
                              const std::vector<int>& active, const KernelSpec& kernel_a,
                              const KernelSpec& kernel_i, double jitter_rel = 1e-10);

Prediction predict_additive(const AdditiveGpModel& model, const Eigen::VectorXd& alpha);

/// Gradient over the full d' coordinates: active block from the anisotropic
/// kernel, inactive block from the isotropic one. Throws std::domain_error
/// when s = 0.
void predict_additive_gradient(const AdditiveGpModel& model, const Eigen::VectorXd& alpha,
                               Eigen::VectorXd& dmean, Eigen::VectorXd& dsd);

namespace detail {

/// Additive log-likelihood at explicit hyperparameters with the gradient in
/// packed log-parameter order [log theta_a.., log s2_a, log theta_i, log
/// s2_i]; exposed so tests can check the gradient against differences.
double additive_loglik_value(const Eigen::MatrixXd& inputs_active,
                             const Eigen::MatrixXd& inputs_inactive, const Eigen::VectorXd& y,
                             const Eigen::VectorXd& theta_a, double sigma2_a, double theta_i,
                             double sigma2_i, double jitter_rel,
                             Eigen::VectorXd* grad_logparams = nullptr);

} // namespace detail

} // namespace shapebo
