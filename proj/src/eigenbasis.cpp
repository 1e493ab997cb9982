#include "shapebo/eigenbasis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "shapebo/optim.hpp"

namespace shapebo {

namespace {

void fix_signs(Eigen::MatrixXd& v) {
    for (int j = 0; j < v.cols(); ++j) {
        int imax = 0;
        v.col(j).cwiseAbs().maxCoeff(&imax);
        if (v(imax, j) < 0.0) v.col(j) = -v.col(j);
    }
}

// indices sorted by the first column, used to prune pairwise-distance scans
std::vector<int> order_by_first_coord(const Eigen::MatrixXd& a) {
    std::vector<int> order(static_cast<std::size_t>(a.rows()));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int i, int j) { return a(i, 0) < a(j, 0); });
    return order;
}

} // namespace

EigenBasis pca_fit(const ShapeDatabase& db, PcaRoute route) {
    const int n = static_cast<int>(db.phi.rows());
    const int big_d = static_cast<int>(db.phi.cols());
    if (n < 2) throw std::invalid_argument("pca_fit: need N >= 2");
    if (!db.phi.allFinite()) throw std::invalid_argument("pca_fit: non-finite entries in Phi");

    EigenBasis basis;
    basis.mean_shape = db.phi.colwise().mean();
    const Eigen::MatrixXd centered = db.phi.rowwise() - basis.mean_shape.transpose();

    if (route == PcaRoute::Auto) route = big_d > n ? PcaRoute::Gram : PcaRoute::Covariance;

    Eigen::VectorXd vals;
    Eigen::MatrixXd vecs; // columns in Phi space, descending eigenvalue order
    if (route == PcaRoute::Covariance) {
        const Eigen::MatrixXd cov = centered.transpose() * centered / n;
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
        if (es.info() != Eigen::Success) throw std::runtime_error("pca_fit: eigensolver failed");
        vals = es.eigenvalues().reverse();
        vecs = es.eigenvectors().rowwise().reverse();
    } else {
        const Eigen::MatrixXd gram = centered * centered.transpose() / n;
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram);
        if (es.info() != Eigen::Success) throw std::runtime_error("pca_fit: eigensolver failed");
        vals = es.eigenvalues().reverse();
        const Eigen::MatrixXd u = es.eigenvectors().rowwise().reverse();
        const double top = std::max(vals[0], 0.0);
        int rank = 0;
        while (rank < vals.size() && vals[rank] > std::max(1e-14 * top, 0.0)) ++rank;
        vecs.resize(big_d, rank);
        for (int j = 0; j < rank; ++j)
            vecs.col(j) = centered.transpose() * u.col(j) / std::sqrt(n * vals[j]);
    }
    vals = vals.cwiseMax(0.0);

    // retain the informative columns (plus slack), capped for memory
    const double top = vals.size() > 0 ? vals[0] : 0.0;
    int keep = 0;
    while (keep < vecs.cols() && vals[keep] > 1e-12 * top) ++keep;
    keep = std::min(static_cast<int>(vecs.cols()), std::max(keep, 1));
    keep = std::min(keep, 512);

    basis.eigenvalues = vals;
    basis.eigenvectors = vecs.leftCols(keep);
    fix_signs(basis.eigenvectors);

    const int d = problem_info(db.problem).dim;
    if (top > 0.0) {
        const int by_share = effective_dim(basis, d, {DimensionPolicy::Kind::CumulativeShare, 0.9999});
        const int by_ratio = effective_dim(basis, d, {DimensionPolicy::Kind::EigenvalueRatio, 1e-6});
        basis.d_prime = std::min({by_share, by_ratio, basis.retained()});
    } else {
        basis.d_prime = 0;
    }
    return basis;
}

int effective_dim(const EigenBasis& basis, int d, const DimensionPolicy& policy) {
    const Eigen::VectorXd& lam = basis.eigenvalues;
    const double total = lam.sum();
    if (!(total > 0.0)) throw std::invalid_argument("effective_dim: all-zero spectrum");

    int d_tilde = static_cast<int>(lam.size());
    if (policy.kind == DimensionPolicy::Kind::CumulativeShare) {
        double cum = 0.0;
        for (int j = 0; j < lam.size(); ++j) {
            cum += lam[j];
            if (cum / total >= policy.threshold) {
                d_tilde = j + 1;
                break;
            }
        }
    } else {
        int count = 0;
        while (count < lam.size() && lam[count] >= policy.threshold * lam[0]) ++count;
        d_tilde = std::max(count, 1);
    }
    return std::min(d, d_tilde);
}

Eigen::VectorXd project(const EigenBasis& basis, const Eigen::VectorXd& phi, int k) {
    if (phi.size() != basis.mean_shape.size())
        throw std::invalid_argument("project: representation length mismatch");
    if (k < 0) k = basis.d_prime;
    if (k > basis.retained()) throw std::invalid_argument("project: k exceeds retained components");
    return basis.eigenvectors.leftCols(k).transpose() * (phi - basis.mean_shape);
}

Eigen::VectorXd reconstruct(const EigenBasis& basis, const Eigen::VectorXd& alpha, int delta) {
    if (delta < 0 || delta > alpha.size() || delta > basis.retained())
        throw std::invalid_argument("reconstruct: delta out of range");
    return basis.mean_shape + basis.eigenvectors.leftCols(delta) * alpha.head(delta);
}

double equivalent_kernel(const EigenBasis& basis, const DesignVector& x, const DesignVector& xp,
                         const MappingSpec& spec) {
    const Eigen::VectorXd a = shape_representation(x, spec);
    const Eigen::VectorXd b = shape_representation(xp, spec);
    const double na = (a - basis.mean_shape).squaredNorm();
    const double nb = (b - basis.mean_shape).squaredNorm();
    return 0.5 * (na + nb - (a - b).squaredNorm());
}

ManifoldStats manifold_stats(const EigenBasis& basis, const ShapeDatabase& db) {
    const int n = static_cast<int>(db.phi.rows());
    if (n < 2) throw std::invalid_argument("manifold_stats: need N >= 2");
    const int dp = std::max(basis.d_prime, 1);

    ManifoldStats stats;
    stats.alphas = (db.phi.rowwise() - basis.mean_shape.transpose()) * basis.eigenvectors.leftCols(dp);
    stats.box_lo = stats.alphas.colwise().minCoeff();
    stats.box_hi = stats.alphas.colwise().maxCoeff();

    // nearest-neighbor distances in A_N via a bidirectional sweep along the
    // first coordinate (a valid prune: |alpha1_i - alpha1_j| <= ||row_i - row_j||)
    const std::vector<int> order = order_by_first_coord(stats.alphas);
    std::vector<double> nn(static_cast<std::size_t>(n),
                           std::numeric_limits<double>::infinity());
    for (int a = 0; a < n; ++a) {
        const int i = order[static_cast<std::size_t>(a)];
        double best = std::numeric_limits<double>::infinity();
        for (int dir : {1, -1}) {
            for (int b = a + dir; b >= 0 && b < n; b += dir) {
                const int j = order[static_cast<std::size_t>(b)];
                const double gap = stats.alphas(j, 0) - stats.alphas(i, 0);
                if (gap * gap >= best) break;
                const double d2 = (stats.alphas.row(i) - stats.alphas.row(j)).squaredNorm();
                if (d2 < best) best = d2;
            }
        }
        nn[static_cast<std::size_t>(i)] = best;
    }
    std::vector<double> nn_sorted = nn;
    std::sort(nn_sorted.begin(), nn_sorted.end());
    const std::size_t q = std::min(nn_sorted.size() - 1,
                                   static_cast<std::size_t>(std::floor(0.95 * n)));
    stats.d95 = std::sqrt(nn_sorted[q]);

    // minimal pairwise distance between database shapes, measured in Phi;
    // exact up to N = 5000, documented uniform subsample beyond
    std::vector<int> rows(static_cast<std::size_t>(n));
    std::iota(rows.begin(), rows.end(), 0);
    if (n > 5000) {
        Rng rng = make_rng(db.seed, 0xd0);
        std::shuffle(rows.begin(), rows.end(), rng);
        rows.resize(5000);
    }
    std::stable_sort(rows.begin(), rows.end(),
                     [&](int i, int j) { return stats.alphas(i, 0) < stats.alphas(j, 0); });
    double best_d2 = std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < rows.size(); ++a) {
        for (std::size_t b = a + 1; b < rows.size(); ++b) {
            const int i = rows[a];
            const int j = rows[b];
            const double gap = stats.alphas(j, 0) - stats.alphas(i, 0);
            if (gap * gap >= best_d2) break;
            const double d2 = (db.phi.row(i) - db.phi.row(j)).squaredNorm();
            if (d2 < best_d2) best_d2 = d2;
        }
    }
    stats.d0 = std::sqrt(best_d2);
    return stats;
}

bool is_on_manifold(const ManifoldStats& stats, const Eigen::VectorXd& alpha) {
    if (alpha.size() != stats.alphas.cols())
        throw std::invalid_argument("is_on_manifold: dimension mismatch");
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i < stats.alphas.rows(); ++i) {
        const double d2 = (stats.alphas.row(i).transpose() - alpha).squaredNorm();
        if (d2 < best) best = d2;
    }
    return std::sqrt(best) <= stats.d95;
}

PreImageResult pre_image(const EigenBasis& basis, const Eigen::VectorXd& alpha_star,
                         ProblemId problem, const MappingSpec& spec, const ShapeDatabase* db,
                         std::uint64_t seed, const PreImageOptions& opts,
                         const Eigen::MatrixXd* db_alphas) {
    if (!alpha_star.allFinite()) throw std::invalid_argument("pre_image: non-finite alpha");
    const int k = static_cast<int>(alpha_star.size());
    if (k > basis.retained()) throw std::invalid_argument("pre_image: alpha exceeds basis");

    const ProblemInfo& info = problem_info(problem);
    Box box;
    box.lo.resize(info.dim);
    box.hi.resize(info.dim);
    for (int j = 0; j < info.dim; ++j) {
        box.lo[j] = info.bounds[static_cast<std::size_t>(j)].lo;
        box.hi[j] = info.bounds[static_cast<std::size_t>(j)].hi;
    }

    const Eigen::VectorXd target =
        basis.mean_shape + basis.eigenvectors.leftCols(k) * alpha_star;
    // clamped so finite-difference probes at the box faces stay evaluable
    const ObjFn residual2 = [&](const Eigen::VectorXd& v) {
        DesignVector x{problem, box.clamp(v)};
        return (shape_representation(x, spec) - target).squaredNorm();
    };

    // starts: nearest database designs in alpha-distance, then random
    std::vector<Eigen::VectorXd> starts;
    if (db != nullptr && db->designs.rows() > 0) {
        Eigen::MatrixXd computed;
        if (db_alphas == nullptr || db_alphas->cols() < std::min<int>(k, basis.retained())) {
            const int kk = std::min<int>(k, basis.retained());
            computed = (db->phi.rowwise() - basis.mean_shape.transpose()) *
                       basis.eigenvectors.leftCols(kk);
            db_alphas = &computed;
        }
        const int kk = std::min<int>(static_cast<int>(db_alphas->cols()), k);
        std::vector<int> idx(static_cast<std::size_t>(db_alphas->rows()));
        std::iota(idx.begin(), idx.end(), 0);
        const Eigen::VectorXd a_head = alpha_star.head(kk);
        std::stable_sort(idx.begin(), idx.end(), [&](int i, int j) {
            return (db_alphas->row(i).leftCols(kk).transpose() - a_head).squaredNorm() <
                   (db_alphas->row(j).leftCols(kk).transpose() - a_head).squaredNorm();
        });
        for (int s = 0; s < std::min<int>(opts.db_starts, static_cast<int>(idx.size())); ++s)
            starts.push_back(db->designs.row(idx[static_cast<std::size_t>(s)]).transpose());
    }
    Rng rng = make_rng(seed, 0x9e1);
    while (static_cast<int>(starts.size()) < opts.multistarts) starts.push_back(box.sample(rng));

    PreImageResult best;
    best.residual = std::numeric_limits<double>::infinity();
    bool any_converged = false;
    for (std::size_t s = 0; s < starts.size(); ++s) {
        const double f0 = residual2(starts[s]);
        OptimResult local;
        if (info.dim <= 10) {
            NelderMeadOptions nm;
            nm.box = &box;
            nm.max_iterations = opts.max_iterations * 4;
            nm.f_tol = opts.tolerance * opts.tolerance;
            local = nelder_mead_minimize(residual2, starts[s], 0.05, nm);
        } else {
            LbfgsOptions lb;
            lb.box = &box;
            lb.max_iterations = opts.max_iterations;
            lb.f_tol = opts.tolerance * opts.tolerance;
            local = lbfgs_minimize(with_fd_gradient(residual2, 1e-7), starts[s], lb);
        }
        any_converged = any_converged || local.converged;
        const bool local_better = local.f < f0;
        const double r = std::sqrt(std::max(local_better ? local.f : f0, 0.0));
        if (r < best.residual) {
            best.residual = r;
            best.x = DesignVector{problem, box.clamp(local_better ? local.x : starts[s])};
            best.best_start = static_cast<int>(s);
        }
    }
    best.converged = any_converged;
    best.alpha = project(basis, shape_representation(best.x, spec), basis.d_prime);
    return best;
}

} // namespace shapebo
