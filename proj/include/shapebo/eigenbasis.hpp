#pragma once

#include <Eigen/Dense>

#include "shapebo/shapes.hpp"

namespace shapebo {

/// PCA basis of a shape database. `eigenvalues` holds the full computed
/// spectrum (descending, length min(N, D)); `eigenvectors` keeps the leading
/// columns (at least every component above 1e-12 of the top eigenvalue, up
/// to a memory cap). `d_prime` is the effective dimension min(d, d~).
struct EigenBasis {
    Eigen::VectorXd mean_shape;
    Eigen::MatrixXd eigenvectors; // D x retained
    Eigen::VectorXd eigenvalues;  // full spectrum, descending
    int d_prime = 0;

    [[nodiscard]] int dim() const { return static_cast<int>(mean_shape.size()); }
    [[nodiscard]] int retained() const { return static_cast<int>(eigenvectors.cols()); }
};

enum class PcaRoute { Auto, Covariance, Gram };

/// Eigen-decomposition of C = (1/N) (Phi - 1 mean^T)^T (Phi - 1 mean^T).
/// The Gram (kernel-PCA) route is used when D > N; both routes agree on the
/// nonzero spectrum. Eigenvector signs are fixed so the largest-magnitude
/// entry of each column is positive.
EigenBasis pca_fit(const ShapeDatabase& db, PcaRoute route = PcaRoute::Auto);

struct DimensionPolicy {
    enum class Kind { CumulativeShare, EigenvalueRatio } kind = Kind::CumulativeShare;
    double threshold = 0.9999; // share of total variance, or lambda_j/lambda_1 floor
};

/// Smallest number of axes satisfying the policy, capped by the parameter
/// count d: d' = min(d, d~).
int effective_dim(const EigenBasis& basis, int d, const DimensionPolicy& policy);

/// alpha_j = v_j . (phi - mean), j = 1..k (k defaults to d_prime).
Eigen::VectorXd project(const EigenBasis& basis, const Eigen::VectorXd& phi, int k = -1);

/// phi_{1:delta} = mean + sum_{j<=delta} alpha_j v_j.
Eigen::VectorXd reconstruct(const EigenBasis& basis, const Eigen::VectorXd& alpha, int delta);

/// Polarization-identity kernel k_phi(x, x'); testing utility.
double equivalent_kernel(const EigenBasis& basis, const DesignVector& x, const DesignVector& xp,
                         const MappingSpec& spec);

struct ManifoldStats {
    Eigen::MatrixXd alphas; // N x d' sample of eigencoordinates (A_N)
    Eigen::VectorXd box_lo; // covering hyper-rectangle
    Eigen::VectorXd box_hi;
    double d95 = 0.0; // 95th quantile of nearest-neighbor distances in A_N
    double d0 = 0.0;  // minimal pairwise distance between database shapes in Phi
};

ManifoldStats manifold_stats(const EigenBasis& basis, const ShapeDatabase& db);

/// Membership test: distance to the nearest A_N sample <= d95.
bool is_on_manifold(const ManifoldStats& stats, const Eigen::VectorXd& alpha);

struct PreImageOptions {
    int multistarts = 10;
    int db_starts = 5;        // best database designs by alpha-distance
    int max_iterations = 200;
    double tolerance = 1e-8;  // on residual change
};

struct PreImageResult {
    DesignVector x;
    Eigen::VectorXd alpha; // projection of phi(x) onto the first d' axes
    double residual = 0.0; // || (phi(x) - mean) - V alpha* ||
    bool converged = true;
    int best_start = 0;
};

/// argmin_x || (phi(x) - mean) - V alpha_star ||^2 by multistart local
/// search. `db` supplies warm starts (may be null); `db_alphas` optionally
/// carries the precomputed projections of the database rows onto at least
/// the first alpha_star.size() axes, saving the projection pass per call.
PreImageResult pre_image(const EigenBasis& basis, const Eigen::VectorXd& alpha_star,
                         ProblemId problem, const MappingSpec& spec,
                         const ShapeDatabase* db, std::uint64_t seed,
                         const PreImageOptions& opts = {},
                         const Eigen::MatrixXd* db_alphas = nullptr);

} // namespace shapebo
