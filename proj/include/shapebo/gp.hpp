#pragma once

#include <Eigen/Dense>
#include <cstdint>

namespace shapebo {

enum class KernelFamily { Matern52, Matern32, SqExp };

/// Correlation kernels; `lengthscales` has one entry per input dimension
/// (anisotropic) or a single entry (isotropic). `variance` is the process
/// variance multiplying the correlation.
struct KernelSpec {
    KernelFamily family = KernelFamily::Matern52;
    Eigen::VectorXd lengthscales;
    double variance = 1.0;

    [[nodiscard]] bool isotropic() const { return lengthscales.size() == 1; }
};

/// Correlation (variance not applied), in (0, 1], k(u,u) = 1.
double kernel_eval(const KernelSpec& spec, const Eigen::VectorXd& u, const Eigen::VectorXd& v);

// kernel math shared with the additive model ------------------------------

double corr_from_dist(KernelFamily family, double r);
/// (d corr / d r) / r — finite at r = 0, used for gradients.
double dcorr_over_r(KernelFamily family, double r);

/// Scaled distances r_i = sqrt(sum_j ((q_j - x_ij)/theta_j)^2) for all rows.
Eigen::VectorXd scaled_distances(const Eigen::MatrixXd& inputs, const Eigen::VectorXd& theta,
                                 const Eigen::VectorXd& q);
Eigen::VectorXd corr_vector(KernelFamily family, const Eigen::MatrixXd& inputs,
                            const Eigen::VectorXd& theta, const Eigen::VectorXd& q);
Eigen::MatrixXd corr_matrix(KernelFamily family, const Eigen::MatrixXd& inputs,
                            const Eigen::VectorXd& theta);

// --------------------------------------------------------------------------

struct ConcentratedLoglik {
    double value = 0.0;
    double beta_hat = 0.0;
    double sigma2_hat = 0.0;
    double jitter_used = 0.0; // relative nugget applied to R
};

/// Profile log-likelihood with closed-form beta and sigma^2, minus the L1
/// penalty lambda * sum(1/theta_j). When `grad_logtheta` is non-null it is
/// filled with the gradient with respect to log(theta). Jitter escalates
/// from `jitter_rel` by x10 up to 1e-4 on factorization failure.
ConcentratedLoglik concentrated_loglik(const Eigen::MatrixXd& inputs, const Eigen::VectorXd& y,
                                       const Eigen::VectorXd& theta, KernelFamily family,
                                       double lambda, double jitter_rel = 1e-10,
                                       Eigen::VectorXd* grad_logtheta = nullptr);

struct GpModel {
    KernelSpec kernel;       // fitted lengthscales and variance sigma2_hat
    double beta_hat = 0.0;
    double jitter_rel = 0.0;
    Eigen::MatrixXd inputs;  // n x p
    Eigen::VectorXd outputs;

    // cached factorization of R + jitter*I and derived quantities
    Eigen::LLT<Eigen::MatrixXd> chol;
    Eigen::VectorXd rinv_resid; // (R + jitter I)^{-1} (y - 1 beta)
    double loglik = 0.0;

    [[nodiscard]] int n() const { return static_cast<int>(inputs.rows()); }
    [[nodiscard]] int p() const { return static_cast<int>(inputs.cols()); }
};

struct FitOptions {
    int starts = 5; // 1 heuristic (theta = coordinate range) + random
    int max_iterations = 150;
    double jitter_rel = 1e-10;
    std::uint64_t seed = 0;
};

/// Multistart quasi-Newton maximization of the concentrated (penalized)
/// log-likelihood over log(theta); bounds 1e-3..1e3 times the coordinate
/// range. Ties between starts break to the lowest start index.
GpModel fit_gp(const Eigen::MatrixXd& inputs, const Eigen::VectorXd& y, KernelFamily family,
               double lambda, const FitOptions& opts = {});

/// Rebuild the cached factorization for explicitly given hyperparameters.
GpModel make_gp(const Eigen::MatrixXd& inputs, const Eigen::VectorXd& y,
                const KernelSpec& kernel, double jitter_rel = 1e-10);

struct Prediction {
    double mean = 0.0;
    double var = 0.0;
    [[nodiscard]] double sd() const { return var > 0.0 ? std::sqrt(var) : 0.0; }
};

Prediction predict(const GpModel& model, const Eigen::VectorXd& q);

/// Analytic gradients of the kriging mean and standard deviation. Throws
/// std::domain_error when s(q) = 0 (gradient of s undefined).
void predict_gradient(const GpModel& model, const Eigen::VectorXd& q, Eigen::VectorXd& dmean,
                      Eigen::VectorXd& dsd);

} // namespace shapebo
