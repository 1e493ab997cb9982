#include "shapebo/gp.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "shapebo/optim.hpp"
#include "shapebo/simd.hpp"

namespace shapebo {

namespace {

constexpr double kSqrt5 = 2.2360679774997896964;
constexpr double kSqrt3 = 1.7320508075688772935;
constexpr double kMaxJitter = 1e-4;
constexpr double kLog2Pi = 1.8378770664093454836;

Eigen::VectorXd expand_theta(const Eigen::VectorXd& theta, int p) {
    if (theta.size() == p) return theta;
    if (theta.size() == 1) return Eigen::VectorXd::Constant(p, theta[0]);
    throw std::invalid_argument("lengthscale dimension mismatch");
}

} // namespace

double corr_from_dist(KernelFamily family, double r) {
    switch (family) {
        case KernelFamily::Matern52:
            return (1.0 + kSqrt5 * r + 5.0 / 3.0 * r * r) * std::exp(-kSqrt5 * r);
        case KernelFamily::Matern32:
            return (1.0 + kSqrt3 * r) * std::exp(-kSqrt3 * r);
        case KernelFamily::SqExp:
            return std::exp(-0.5 * r * r);
    }
    return 0.0;
}

double dcorr_over_r(KernelFamily family, double r) {
    switch (family) {
        case KernelFamily::Matern52:
            return -(5.0 / 3.0) * (1.0 + kSqrt5 * r) * std::exp(-kSqrt5 * r);
        case KernelFamily::Matern32:
            return -3.0 * std::exp(-kSqrt3 * r);
        case KernelFamily::SqExp:
            return -std::exp(-0.5 * r * r);
    }
    return 0.0;
}

double kernel_eval(const KernelSpec& spec, const Eigen::VectorXd& u, const Eigen::VectorXd& v) {
    if (u.size() != v.size()) throw std::invalid_argument("kernel_eval: dimension mismatch");
    if (!spec.isotropic() && spec.lengthscales.size() != u.size())
        throw std::invalid_argument("kernel_eval: lengthscale dimension mismatch");
    double r2 = 0.0;
    for (int j = 0; j < u.size(); ++j) {
        const double th = spec.isotropic() ? spec.lengthscales[0] : spec.lengthscales[j];
        const double d = (u[j] - v[j]) / th;
        r2 += d * d;
    }
    return corr_from_dist(spec.family, std::sqrt(r2));
}

Eigen::VectorXd scaled_distances(const Eigen::MatrixXd& inputs, const Eigen::VectorXd& theta,
                                 const Eigen::VectorXd& q) {
    const int n = static_cast<int>(inputs.rows());
    const int p = static_cast<int>(inputs.cols());
    const Eigen::VectorXd th = expand_theta(theta, p);
    Eigen::VectorXd acc = Eigen::VectorXd::Zero(n);
    for (int j = 0; j < p; ++j)
        simd::add_scaled_sqdiff(acc.data(), inputs.col(j).data(), static_cast<std::size_t>(n),
                                q[j], 1.0 / th[j]);
    return acc.array().sqrt();
}

Eigen::VectorXd corr_vector(KernelFamily family, const Eigen::MatrixXd& inputs,
                            const Eigen::VectorXd& theta, const Eigen::VectorXd& q) {
    Eigen::VectorXd r = scaled_distances(inputs, theta, q);
    for (int i = 0; i < r.size(); ++i) r[i] = corr_from_dist(family, r[i]);
    return r;
}

Eigen::MatrixXd corr_matrix(KernelFamily family, const Eigen::MatrixXd& inputs,
                            const Eigen::VectorXd& theta) {
    const int n = static_cast<int>(inputs.rows());
    const int p = static_cast<int>(inputs.cols());
    const Eigen::VectorXd th = expand_theta(theta, p);
    const Eigen::MatrixXd scaled = inputs * th.cwiseInverse().asDiagonal();
    Eigen::MatrixXd r(n, n);
    for (int i = 0; i < n; ++i) {
        r(i, i) = 1.0;
        for (int k = i + 1; k < n; ++k) {
            const double d = (scaled.row(i) - scaled.row(k)).norm();
            r(i, k) = r(k, i) = corr_from_dist(family, d);
        }
    }
    return r;
}

ConcentratedLoglik concentrated_loglik(const Eigen::MatrixXd& inputs, const Eigen::VectorXd& y,
                                       const Eigen::VectorXd& theta, KernelFamily family,
                                       double lambda, double jitter_rel,
                                       Eigen::VectorXd* grad_logtheta) {
    const int n = static_cast<int>(inputs.rows());
    const int p = static_cast<int>(inputs.cols());
    if (n < 2) throw std::invalid_argument("concentrated_loglik: need n >= 2");
    if ((theta.array() <= 0.0).any() || !theta.allFinite())
        throw std::invalid_argument("concentrated_loglik: lengthscales must be positive");

    const Eigen::MatrixXd corr = corr_matrix(family, inputs, theta);

    // jitter escalation on factorization failure
    Eigen::LLT<Eigen::MatrixXd> llt;
    double jitter = jitter_rel > 0.0 ? jitter_rel : 1e-10;
    for (;;) {
        Eigen::MatrixXd r_j = corr;
        r_j.diagonal().array() += jitter;
        llt.compute(r_j);
        if (llt.info() == Eigen::Success) break;
        jitter *= 10.0;
        if (jitter > kMaxJitter)
            throw std::runtime_error("concentrated_loglik: correlation matrix singular");
    }

    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(n);
    const Eigen::VectorXd rinv_y = llt.solve(y);
    const Eigen::VectorXd rinv_1 = llt.solve(ones);
    const double beta = ones.dot(rinv_y) / ones.dot(rinv_1);
    const Eigen::VectorXd resid = y - beta * ones;
    const Eigen::VectorXd rinv_resid = rinv_y - beta * rinv_1;
    double sigma2 = resid.dot(rinv_resid) / n;
    sigma2 = std::max(sigma2, 0.0);

    double logdet_r = 0.0;
    for (int i = 0; i < n; ++i) logdet_r += 2.0 * std::log(llt.matrixLLT()(i, i));

    // floor on sigma^2 keeps the value finite for degenerate (constant) data
    const double sigma2_eff = std::max(sigma2, 1e-300);
    const Eigen::VectorXd inv_theta = expand_theta(theta, p).cwiseInverse();
    double value = -0.5 * n * kLog2Pi - 0.5 * (n * std::log(sigma2_eff) + logdet_r) - 0.5 * n;
    double penalty = 0.0;
    for (int j = 0; j < theta.size(); ++j) penalty += 1.0 / theta[j];
    value -= lambda * penalty;

    if (grad_logtheta) {
        // envelope theorem: beta and sigma^2 are at their optima, so only the
        // explicit theta dependence contributes
        const Eigen::MatrixXd rinv = llt.solve(Eigen::MatrixXd::Identity(n, n));
        const Eigen::VectorXd b = rinv_resid;
        Eigen::MatrixXd w = (b * b.transpose()) / sigma2_eff - rinv;

        // G_ik = (d corr / d r) / r at the pairwise scaled distances
        const Eigen::VectorXd th = expand_theta(theta, p);
        const Eigen::MatrixXd scaled = inputs * th.cwiseInverse().asDiagonal();
        Eigen::MatrixXd g(n, n);
        for (int i = 0; i < n; ++i) {
            g(i, i) = dcorr_over_r(family, 0.0);
            for (int k = i + 1; k < n; ++k) {
                const double d = (scaled.row(i) - scaled.row(k)).norm();
                g(i, k) = g(k, i) = dcorr_over_r(family, d);
            }
        }
        const Eigen::MatrixXd m = w.cwiseProduct(g);
        const Eigen::VectorXd m_rowsum = m.rowwise().sum();

        grad_logtheta->resize(theta.size());
        const bool iso = theta.size() == 1 && p > 1;
        for (int jt = 0; jt < theta.size(); ++jt) {
            double quad = 0.0; // sum_ik M_ik (x_ij - x_kj)^2 over penalized dims
            if (iso) {
                for (int j = 0; j < p; ++j) {
                    const Eigen::VectorXd xj = inputs.col(j);
                    quad += 2.0 * (xj.array().square().matrix().dot(m_rowsum)) -
                            2.0 * xj.dot(m * xj);
                }
            } else {
                const Eigen::VectorXd xj = inputs.col(jt);
                quad = 2.0 * (xj.array().square().matrix().dot(m_rowsum)) - 2.0 * xj.dot(m * xj);
            }
            const double t = theta[jt];
            const double dl_dtheta = -0.5 * quad / (t * t * t) + lambda / (t * t);
            (*grad_logtheta)[jt] = t * dl_dtheta;
        }
    }

    return {value, beta, sigma2, jitter};
}

GpModel make_gp(const Eigen::MatrixXd& inputs, const Eigen::VectorXd& y,
                const KernelSpec& kernel, double jitter_rel) {
    GpModel model;
    model.kernel = kernel;
    model.inputs = inputs;
    model.outputs = y;

    const int n = static_cast<int>(inputs.rows());
    const Eigen::MatrixXd corr = corr_matrix(kernel.family, inputs, kernel.lengthscales);
    double jitter = jitter_rel > 0.0 ? jitter_rel : 1e-10;
    for (;;) {
        Eigen::MatrixXd r_j = corr;
        r_j.diagonal().array() += jitter;
        model.chol.compute(r_j);
        if (model.chol.info() == Eigen::Success) break;
        jitter *= 10.0;
        if (jitter > kMaxJitter) throw std::runtime_error("make_gp: correlation matrix singular");
    }
    model.jitter_rel = jitter;

    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(n);
    const Eigen::VectorXd rinv_y = model.chol.solve(y);
    const Eigen::VectorXd rinv_1 = model.chol.solve(ones);
    model.beta_hat = ones.dot(rinv_y) / ones.dot(rinv_1);
    model.rinv_resid = rinv_y - model.beta_hat * rinv_1;
    return model;
}

GpModel fit_gp(const Eigen::MatrixXd& inputs, const Eigen::VectorXd& y, KernelFamily family,
               double lambda, const FitOptions& opts) {
    const int n = static_cast<int>(inputs.rows());
    const int p = static_cast<int>(inputs.cols());
    if (n < 2) throw std::invalid_argument("fit_gp: need n >= 2");

    Eigen::VectorXd range(p);
    for (int j = 0; j < p; ++j) {
        range[j] = inputs.col(j).maxCoeff() - inputs.col(j).minCoeff();
        if (!(range[j] > 0.0)) range[j] = 1.0;
    }

    Box log_box;
    log_box.lo = (1e-3 * range.array()).log().matrix();
    log_box.hi = (1e3 * range.array()).log().matrix();

    const GradObjFn neg_pl = [&](const Eigen::VectorXd& z, Eigen::VectorXd* grad) {
        const Eigen::VectorXd theta = z.array().exp().matrix();
        const ConcentratedLoglik ll =
            concentrated_loglik(inputs, y, theta, family, lambda, opts.jitter_rel, grad);
        if (grad) *grad = -*grad;
        return -ll.value;
    };

    Rng rng = make_rng(opts.seed, 0x617);
    double best_value = std::numeric_limits<double>::infinity();
    Eigen::VectorXd best_theta;
    bool any_ok = false;
    for (int s = 0; s < std::max(opts.starts, 1); ++s) {
        Eigen::VectorXd z0(p);
        if (s == 0) {
            z0 = range.array().log().matrix(); // heuristic: theta of the order of the data range
        } else {
            for (int j = 0; j < p; ++j) z0[j] = uniform(rng, std::log(0.05 * range[j]),
                                                        std::log(10.0 * range[j]));
        }
        LbfgsOptions lb;
        lb.box = &log_box;
        lb.max_iterations = opts.max_iterations;
        try {
            const OptimResult res = lbfgs_minimize(neg_pl, z0, lb);
            if (res.f < best_value) {
                best_value = res.f;
                best_theta = res.x.array().exp().matrix();
            }
            any_ok = true;
        } catch (const std::runtime_error&) {
            // singular correlation at this start; try the next one
        }
    }
    if (!any_ok) throw std::runtime_error("fit_gp: all starts failed numerically");

    const ConcentratedLoglik ll =
        concentrated_loglik(inputs, y, best_theta, family, lambda, opts.jitter_rel);
    KernelSpec kernel{family, best_theta, ll.sigma2_hat};
    GpModel model = make_gp(inputs, y, kernel, ll.jitter_used);
    model.loglik = ll.value;
    if (ll.sigma2_hat <= 0.0) model.rinv_resid.setZero();
    return model;
}

Prediction predict(const GpModel& model, const Eigen::VectorXd& q) {
    const double s2 = model.kernel.variance;
    const Eigen::VectorXd corr =
        corr_vector(model.kernel.family, model.inputs, model.kernel.lengthscales, q);
    Prediction out;
    out.mean = model.beta_hat + corr.dot(model.rinv_resid);
    if (s2 <= 0.0) {
        out.var = 0.0;
        return out;
    }
    // k^T K^-1 k = sigma2 * corr^T (R+jitter)^-1 corr
    const double quad = corr.dot(model.chol.solve(corr));
    out.var = std::max(s2 * (1.0 - quad), 0.0);
    return out;
}

void predict_gradient(const GpModel& model, const Eigen::VectorXd& q, Eigen::VectorXd& dmean,
                      Eigen::VectorXd& dsd) {
    const int n = model.n();
    const int p = model.p();
    const double s2 = model.kernel.variance;
    const Eigen::VectorXd th = expand_theta(model.kernel.lengthscales, p);

    const Eigen::VectorXd r = scaled_distances(model.inputs, model.kernel.lengthscales, q);
    Eigen::VectorXd corr(n), g(n);
    for (int i = 0; i < n; ++i) {
        corr[i] = corr_from_dist(model.kernel.family, r[i]);
        g[i] = dcorr_over_r(model.kernel.family, r[i]);
    }

    const double quad = s2 > 0.0 ? corr.dot(model.chol.solve(corr)) : 0.0;
    const double var = std::max(s2 * (1.0 - quad), 0.0);
    const double sd = std::sqrt(var);
    if (!(sd > 0.0)) throw std::domain_error("predict_gradient: s = 0 at query");

    // d corr_i / d q_j = g_i * (q_j - x_ij) / theta_j^2
    Eigen::MatrixXd dcorr(n, p);
    for (int j = 0; j < p; ++j) {
        const Eigen::VectorXd diff = (q[j] - model.inputs.col(j).array()).matrix();
        dcorr.col(j) = g.cwiseProduct(diff) / (th[j] * th[j]);
    }

    dmean = dcorr.transpose() * model.rinv_resid;
    const Eigen::VectorXd rinv_corr = model.chol.solve(corr);
    // ds = -(dk^T K^-1 k)/s; the sigma2 factors of dk and K^-1 k leave one s2
    dsd = -(s2 / sd) * (dcorr.transpose() * rinv_corr);
}

} // namespace shapebo
