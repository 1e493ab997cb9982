#include "shapebo/reduction.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "shapebo/optim.hpp"

namespace shapebo {

namespace {

constexpr double kMaxJitter = 1e-4;
constexpr double kLog2Pi = 1.8378770664093454836;

Eigen::MatrixXd select_columns(const Eigen::MatrixXd& m, const std::vector<int>& cols) {
    Eigen::MatrixXd out(m.rows(), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t j = 0; j < cols.size(); ++j) out.col(static_cast<Eigen::Index>(j)) = m.col(cols[j]);
    return out;
}

Eigen::VectorXd column_ranges(const Eigen::MatrixXd& m) {
    Eigen::VectorXd r(m.cols());
    for (int j = 0; j < m.cols(); ++j) {
        r[j] = m.col(j).maxCoeff() - m.col(j).minCoeff();
        if (!(r[j] > 0.0)) r[j] = 1.0;
    }
    return r;
}

} // namespace

ActiveSet select_active(const Eigen::MatrixXd& alphas, const Eigen::VectorXd& y,
                        const SelectOptions& opts) {
    const int n = static_cast<int>(alphas.rows());
    const int d = static_cast<int>(alphas.cols());
    if (n < 2) throw std::invalid_argument("select_active: need n >= 2");
    if (d < 1) throw std::invalid_argument("select_active: need d' >= 1");

    ActiveSet set;
    set.ranges = opts.use_domain_range ? (opts.domain_hi - opts.domain_lo).eval()
                                       : column_ranges(alphas);
    for (int j = 0; j < d; ++j)
        if (!(set.ranges[j] > 0.0)) set.ranges[j] = 1.0;

    const double y_var = (y.array() - y.mean()).square().sum() / n;
    if (!(y_var > 0.0)) {
        // degenerate outputs: no likelihood signal; keep the initialization's
        // minimum normalized lengthscale
        set.degenerate = true;
        set.theta = set.ranges;
        set.normalized_theta = Eigen::VectorXd::Ones(d);
        set.indices = {0};
        return set;
    }

    const double lambda = opts.lambda_override >= 0.0
                              ? opts.lambda_override
                              : static_cast<double>(n) / d;
    const GpModel gp = fit_gp(alphas, y, KernelFamily::Matern52, lambda, opts.fit);

    set.theta = gp.kernel.lengthscales;
    set.normalized_theta = set.theta.cwiseQuotient(set.ranges);
    const double min_norm = set.normalized_theta.minCoeff();
    for (int j = 0; j < d; ++j)
        if (set.normalized_theta[j] <= opts.threshold_factor * min_norm) set.indices.push_back(j);

    // near-isotropic degenerate case: every dimension passed the 10x test
    const int cap = std::min(d, std::max(1, n / 5));
    if (static_cast<int>(set.indices.size()) == d && d > cap) {
        std::vector<int> order(static_cast<std::size_t>(d));
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
            return set.normalized_theta[a] < set.normalized_theta[b];
        });
        order.resize(static_cast<std::size_t>(cap));
        std::sort(order.begin(), order.end());
        set.indices = order;
    }
    return set;
}

namespace {

struct AdditiveParams {
    Eigen::VectorXd theta_a; // delta lengthscales
    double sigma2_a = 1.0;
    double theta_i = 1.0;
    double sigma2_i = 1.0;
};

// likelihood of the additive model at fixed hyperparameters, with optional
// gradient in the packed log-parameter order [log th_a.., log s2_a, log th_i, log s2_i]
struct AdditiveEval {
    double value = -std::numeric_limits<double>::infinity();
    double beta = 0.0;
    double jitter = 0.0;
};

AdditiveEval additive_loglik(const Eigen::MatrixXd& xa, const Eigen::MatrixXd& xi,
                             const Eigen::VectorXd& y, const AdditiveParams& prm,
                             double jitter_rel, Eigen::VectorXd* grad) {
    const int n = static_cast<int>(y.size());
    const Eigen::MatrixXd ra = corr_matrix(KernelFamily::Matern52, xa, prm.theta_a);
    const Eigen::MatrixXd ri =
        corr_matrix(KernelFamily::Matern52, xi, Eigen::VectorXd::Constant(1, prm.theta_i));

    const double total = prm.sigma2_a + prm.sigma2_i;
    Eigen::LLT<Eigen::MatrixXd> llt;
    double jitter = jitter_rel > 0.0 ? jitter_rel : 1e-10;
    for (;;) {
        Eigen::MatrixXd k = prm.sigma2_a * ra + prm.sigma2_i * ri;
        k.diagonal().array() += jitter * total;
        llt.compute(k);
        if (llt.info() == Eigen::Success) break;
        jitter *= 10.0;
        if (jitter > kMaxJitter)
            throw std::runtime_error("additive_loglik: covariance singular");
    }

    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(n);
    const Eigen::VectorXd kinv_y = llt.solve(y);
    const Eigen::VectorXd kinv_1 = llt.solve(ones);
    const double beta = ones.dot(kinv_y) / ones.dot(kinv_1);
    const Eigen::VectorXd a = kinv_y - beta * kinv_1; // K^-1 (y - 1 beta)

    double logdet = 0.0;
    for (int i = 0; i < n; ++i) logdet += 2.0 * std::log(llt.matrixLLT()(i, i));
    AdditiveEval out;
    out.value = -0.5 * n * kLog2Pi - 0.5 * logdet - 0.5 * (y - beta * ones).dot(a);
    out.beta = beta;
    out.jitter = jitter;

    if (grad) {
        const int delta = static_cast<int>(prm.theta_a.size());
        grad->resize(delta + 3);
        const Eigen::MatrixXd kinv = llt.solve(Eigen::MatrixXd::Identity(n, n));
        const Eigen::MatrixXd w = a * a.transpose() - kinv; // dl/dK = w/2

        // pairwise scaled-distance helper matrices
        const auto g_matrix = [&](const Eigen::MatrixXd& x, const Eigen::VectorXd& th) {
            const Eigen::MatrixXd scaled =
                x * (th.size() == x.cols() ? th : Eigen::VectorXd::Constant(x.cols(), th[0]))
                        .cwiseInverse()
                        .asDiagonal();
            Eigen::MatrixXd g(n, n);
            for (int i = 0; i < n; ++i) {
                g(i, i) = dcorr_over_r(KernelFamily::Matern52, 0.0);
                for (int k = i + 1; k < n; ++k) {
                    const double dist = (scaled.row(i) - scaled.row(k)).norm();
                    g(i, k) = g(k, i) = dcorr_over_r(KernelFamily::Matern52, dist);
                }
            }
            return g;
        };

        // active lengthscales
        const Eigen::MatrixXd ma = w.cwiseProduct(g_matrix(xa, prm.theta_a)) * prm.sigma2_a;
        const Eigen::VectorXd ma_rowsum = ma.rowwise().sum();
        for (int j = 0; j < delta; ++j) {
            const Eigen::VectorXd xj = xa.col(j);
            const double quad =
                2.0 * xj.array().square().matrix().dot(ma_rowsum) - 2.0 * xj.dot(ma * xj);
            const double t = prm.theta_a[j];
            (*grad)[j] = t * (-0.5 * quad / (t * t * t)); // d/d log theta
        }
        // sigma2_a: dK/ds2a = ra + jitter I
        {
            double tr = 0.5 * (w.cwiseProduct(ra)).sum() + 0.5 * out.jitter * w.trace();
            (*grad)[delta] = prm.sigma2_a * tr;
        }
        // inactive lengthscale (isotropic: sum over inactive dims)
        {
            const Eigen::MatrixXd mi = w.cwiseProduct(
                                           g_matrix(xi, Eigen::VectorXd::Constant(1, prm.theta_i))) *
                                       prm.sigma2_i;
            const Eigen::VectorXd mi_rowsum = mi.rowwise().sum();
            double quad = 0.0;
            for (int j = 0; j < xi.cols(); ++j) {
                const Eigen::VectorXd xj = xi.col(j);
                quad += 2.0 * xj.array().square().matrix().dot(mi_rowsum) - 2.0 * xj.dot(mi * xj);
            }
            const double t = prm.theta_i;
            (*grad)[delta + 1] = t * (-0.5 * quad / (t * t * t));
        }
        // sigma2_i
        {
            double tr = 0.5 * (w.cwiseProduct(ri)).sum() + 0.5 * out.jitter * w.trace();
            (*grad)[delta + 2] = prm.sigma2_i * tr;
        }
    }
    return out;
}

} // namespace

AdditiveGpModel make_additive(const Eigen::MatrixXd& alphas, const Eigen::VectorXd& y,
                              const std::vector<int>& active, const KernelSpec& kernel_a,
                              const KernelSpec& kernel_i, double jitter_rel) {
    const int n = static_cast<int>(alphas.rows());
    const int d = static_cast<int>(alphas.cols());

    AdditiveGpModel model;
    model.active = active;
    std::sort(model.active.begin(), model.active.end());
    for (int j = 0; j < d; ++j)
        if (!std::binary_search(model.active.begin(), model.active.end(), j))
            model.inactive.push_back(j);
    model.kernel_a = kernel_a;
    model.kernel_i = kernel_i;
    model.inputs = alphas;
    model.outputs = y;
    model.inputs_active = select_columns(alphas, model.active);
    model.inputs_inactive = select_columns(alphas, model.inactive);

    const Eigen::MatrixXd ra =
        corr_matrix(kernel_a.family, model.inputs_active, kernel_a.lengthscales);
    const double total = model.total_variance();
    Eigen::MatrixXd k = kernel_a.variance * ra;
    if (!model.inactive.empty() && kernel_i.variance > 0.0) {
        const Eigen::MatrixXd ri =
            corr_matrix(kernel_i.family, model.inputs_inactive, kernel_i.lengthscales);
        k += kernel_i.variance * ri;
    }

    if (total <= 0.0) {
        // constant-output degenerate model: prediction is the constant mean
        model.beta_hat = y.mean();
        model.kinv_resid = Eigen::VectorXd::Zero(n);
        model.jitter_rel = jitter_rel;
        return model;
    }

    double jitter = jitter_rel > 0.0 ? jitter_rel : 1e-10;
    for (;;) {
        Eigen::MatrixXd kj = k;
        kj.diagonal().array() += jitter * total;
        model.chol.compute(kj);
        if (model.chol.info() == Eigen::Success) break;
        jitter *= 10.0;
        if (jitter > kMaxJitter) throw std::runtime_error("make_additive: covariance singular");
    }
    model.jitter_rel = jitter;

    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(n);
    const Eigen::VectorXd kinv_y = model.chol.solve(y);
    const Eigen::VectorXd kinv_1 = model.chol.solve(ones);
    model.beta_hat = ones.dot(kinv_y) / ones.dot(kinv_1);
    model.kinv_resid = kinv_y - model.beta_hat * kinv_1;
    return model;
}

AdditiveGpModel fit_additive(const Eigen::MatrixXd& alphas, const Eigen::VectorXd& y,
                             const ActiveSet& active, const FitOptions& opts) {
    const int n = static_cast<int>(alphas.rows());
    const int d = static_cast<int>(alphas.cols());
    if (active.count() < 1) throw std::invalid_argument("fit_additive: need delta >= 1");

    std::vector<int> act = active.indices;
    std::sort(act.begin(), act.end());
    std::vector<int> inact;
    for (int j = 0; j < d; ++j)
        if (!std::binary_search(act.begin(), act.end(), j)) inact.push_back(j);

    if (inact.empty()) {
        // no inactive coordinates: degrade to a plain anisotropic GP
        const Eigen::MatrixXd xa = select_columns(alphas, act);
        const GpModel plain = fit_gp(xa, y, KernelFamily::Matern52, 0.0, opts);
        KernelSpec none{KernelFamily::Matern52, Eigen::VectorXd::Constant(1, 1.0), 0.0};
        return make_additive(alphas, y, act, plain.kernel, none, plain.jitter_rel);
    }

    const Eigen::MatrixXd xa = select_columns(alphas, act);
    const Eigen::MatrixXd xi = select_columns(alphas, inact);
    const int delta = static_cast<int>(act.size());

    const double y_var = (y.array() - y.mean()).square().sum() / n;
    if (!(y_var > 0.0)) {
        KernelSpec ka{KernelFamily::Matern52, column_ranges(xa), 0.0};
        KernelSpec ki{KernelFamily::Matern52, Eigen::VectorXd::Constant(1, column_ranges(xi).maxCoeff()), 0.0};
        return make_additive(alphas, y, act, ka, ki, opts.jitter_rel);
    }

    const Eigen::VectorXd range_a = column_ranges(xa);
    const double range_i = column_ranges(xi).maxCoeff();

    // packed log parameters: [log theta_a (delta), log s2_a, log theta_i, log s2_i]
    Box box;
    box.lo.resize(delta + 3);
    box.hi.resize(delta + 3);
    for (int j = 0; j < delta; ++j) {
        box.lo[j] = std::log(1e-3 * range_a[j]);
        box.hi[j] = std::log(1e3 * range_a[j]);
    }
    box.lo[delta] = std::log(1e-8 * y_var);
    box.hi[delta] = std::log(1e3 * y_var);
    box.lo[delta + 1] = std::log(1e-3 * range_i);
    box.hi[delta + 1] = std::log(1e3 * range_i);
    box.lo[delta + 2] = std::log(1e-8 * y_var);
    box.hi[delta + 2] = std::log(1e3 * y_var);

    const auto unpack = [&](const Eigen::VectorXd& z) {
        AdditiveParams prm;
        prm.theta_a = z.head(delta).array().exp().matrix();
        prm.sigma2_a = std::exp(z[delta]);
        prm.theta_i = std::exp(z[delta + 1]);
        prm.sigma2_i = std::exp(z[delta + 2]);
        return prm;
    };

    const GradObjFn neg_ll = [&](const Eigen::VectorXd& z, Eigen::VectorXd* grad) {
        const AdditiveParams prm = unpack(z);
        const AdditiveEval ev = additive_loglik(xa, xi, y, prm, opts.jitter_rel, grad);
        if (grad) *grad = -*grad;
        return -ev.value;
    };

    Rng rng = make_rng(opts.seed, 0xadd);
    double best = std::numeric_limits<double>::infinity();
    Eigen::VectorXd best_z;
    bool any_ok = false;
    for (int s = 0; s < std::max(opts.starts, 1); ++s) {
        Eigen::VectorXd z0(delta + 3);
        if (s == 0) {
            for (int j = 0; j < delta; ++j) z0[j] = std::log(range_a[j]);
            z0[delta] = std::log(0.7 * y_var);
            z0[delta + 1] = std::log(range_i);
            z0[delta + 2] = std::log(0.3 * y_var);
        } else {
            for (int j = 0; j < delta + 3; ++j) z0[j] = uniform(rng, box.lo[j], box.hi[j]);
        }
        LbfgsOptions lb;
        lb.box = &box;
        lb.max_iterations = opts.max_iterations;
        try {
            const OptimResult res = lbfgs_minimize(neg_ll, z0, lb);
            if (res.f < best) {
                best = res.f;
                best_z = res.x;
            }
            any_ok = true;
        } catch (const std::runtime_error&) {
        }
    }
    if (!any_ok) throw std::runtime_error("fit_additive: all starts failed numerically");

    const AdditiveParams prm = unpack(best_z);
    const AdditiveEval ev = additive_loglik(xa, xi, y, prm, opts.jitter_rel, nullptr);
    KernelSpec ka{KernelFamily::Matern52, prm.theta_a, prm.sigma2_a};
    KernelSpec ki{KernelFamily::Matern52, Eigen::VectorXd::Constant(1, prm.theta_i), prm.sigma2_i};
    AdditiveGpModel model = make_additive(alphas, y, act, ka, ki, ev.jitter);
    model.loglik = ev.value;
    return model;
}

namespace detail {

double additive_loglik_value(const Eigen::MatrixXd& inputs_active,
                             const Eigen::MatrixXd& inputs_inactive, const Eigen::VectorXd& y,
                             const Eigen::VectorXd& theta_a, double sigma2_a, double theta_i,
                             double sigma2_i, double jitter_rel,
                             Eigen::VectorXd* grad_logparams) {
    AdditiveParams prm;
    prm.theta_a = theta_a;
    prm.sigma2_a = sigma2_a;
    prm.theta_i = theta_i;
    prm.sigma2_i = sigma2_i;
    return additive_loglik(inputs_active, inputs_inactive, y, prm, jitter_rel, grad_logparams)
        .value;
}

} // namespace detail

namespace {

Eigen::VectorXd gather(const Eigen::VectorXd& v, const std::vector<int>& idx) {
    Eigen::VectorXd out(static_cast<Eigen::Index>(idx.size()));
    for (std::size_t j = 0; j < idx.size(); ++j) out[static_cast<Eigen::Index>(j)] = v[idx[j]];
    return out;
}

} // namespace

Prediction predict_additive(const AdditiveGpModel& model, const Eigen::VectorXd& alpha) {
    if (alpha.size() != model.dim())
        throw std::invalid_argument("predict_additive: dimension mismatch");
    const double total = model.total_variance();
    if (total <= 0.0) return {model.beta_hat, 0.0};

    Eigen::VectorXd k = Eigen::VectorXd::Zero(model.n());
    if (!model.active.empty() && model.kernel_a.variance > 0.0)
        k += model.kernel_a.variance * corr_vector(model.kernel_a.family, model.inputs_active,
                                                   model.kernel_a.lengthscales,
                                                   gather(alpha, model.active));
    if (!model.inactive.empty() && model.kernel_i.variance > 0.0)
        k += model.kernel_i.variance * corr_vector(model.kernel_i.family, model.inputs_inactive,
                                                   model.kernel_i.lengthscales,
                                                   gather(alpha, model.inactive));
    Prediction out;
    out.mean = model.beta_hat + k.dot(model.kinv_resid);
    out.var = std::max(total - k.dot(model.chol.solve(k)), 0.0);
    return out;
}

void predict_additive_gradient(const AdditiveGpModel& model, const Eigen::VectorXd& alpha,
                               Eigen::VectorXd& dmean, Eigen::VectorXd& dsd) {
    if (alpha.size() != model.dim())
        throw std::invalid_argument("predict_additive_gradient: dimension mismatch");
    const int n = model.n();
    const int d = model.dim();
    const double total = model.total_variance();
    if (total <= 0.0) throw std::domain_error("predict_additive_gradient: s = 0 at query");

    Eigen::VectorXd k = Eigen::VectorXd::Zero(n);
    Eigen::MatrixXd dk = Eigen::MatrixXd::Zero(n, d);

    const auto add_block = [&](const KernelSpec& spec, const Eigen::MatrixXd& block_inputs,
                               const std::vector<int>& idx) {
        if (idx.empty() || spec.variance <= 0.0) return;
        const Eigen::VectorXd q = gather(alpha, idx);
        const Eigen::VectorXd r = scaled_distances(block_inputs, spec.lengthscales, q);
        for (int i = 0; i < n; ++i) {
            k[i] += spec.variance * corr_from_dist(spec.family, r[i]);
            const double g = spec.variance * dcorr_over_r(spec.family, r[i]);
            for (std::size_t jj = 0; jj < idx.size(); ++jj) {
                const double th = spec.isotropic() ? spec.lengthscales[0]
                                                   : spec.lengthscales[static_cast<Eigen::Index>(jj)];
                dk(i, idx[jj]) +=
                    g * (q[static_cast<Eigen::Index>(jj)] - block_inputs(i, static_cast<Eigen::Index>(jj))) /
                    (th * th);
            }
        }
    };
    add_block(model.kernel_a, model.inputs_active, model.active);
    add_block(model.kernel_i, model.inputs_inactive, model.inactive);

    const Eigen::VectorXd kinv_k = model.chol.solve(k);
    const double var = std::max(total - k.dot(kinv_k), 0.0);
    const double sd = std::sqrt(var);
    if (!(sd > 0.0)) throw std::domain_error("predict_additive_gradient: s = 0 at query");

    dmean = dk.transpose() * model.kinv_resid;
    dsd = -(dk.transpose() * kinv_k) / sd;
}

} // namespace shapebo
