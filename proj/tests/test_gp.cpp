#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "shapebo/gp.hpp"
#include "shapebo/rng.hpp"

using namespace shapebo;

namespace {

Eigen::MatrixXd random_inputs(int n, int p, std::uint64_t seed, double lo = -1, double hi = 1) {
    Rng rng = make_rng(seed);
    Eigen::MatrixXd x(n, p);
    for (int i = 0; i < x.size(); ++i) x.data()[i] = uniform(rng, lo, hi);
    return x;
}

// dense-algebra oracle for the concentrated log-likelihood, written
// independently of the library implementation
double dense_loglik_oracle(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                           const Eigen::VectorXd& theta, double lambda, double jitter) {
    const int n = static_cast<int>(x.rows());
    Eigen::MatrixXd r(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            double r2 = 0.0;
            for (int k = 0; k < x.cols(); ++k) {
                const double d = (x(i, k) - x(j, k)) / theta[k];
                r2 += d * d;
            }
            const double d = std::sqrt(r2);
            r(i, j) = (1.0 + std::sqrt(5.0) * d + 5.0 / 3.0 * r2) * std::exp(-std::sqrt(5.0) * d);
        }
    r.diagonal().array() += jitter;
    const Eigen::MatrixXd rinv = r.inverse();
    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(n);
    const double beta = ones.dot(rinv * y) / ones.dot(rinv * ones);
    const Eigen::VectorXd resid = y - beta * ones;
    const double sigma2 = resid.dot(rinv * resid) / n;
    const Eigen::MatrixXd k = sigma2 * r;
    double value = -0.5 * n * std::log(2.0 * M_PI) - 0.5 * std::log(k.determinant()) -
                   0.5 * resid.dot(k.inverse() * resid);
    for (int j = 0; j < theta.size(); ++j) value -= lambda / theta[j];
    return value;
}

} // namespace

TEST_CASE("kernel values") {
    KernelSpec spec{KernelFamily::Matern52, Eigen::VectorXd::Constant(1, 1.0), 1.0};
    Eigen::VectorXd u(1), v(1);
    u << 0.3;
    v << 0.3;
    CHECK(kernel_eval(spec, u, v) == 1.0);

    v << 1.3; // scaled distance 1
    const double expected = (1.0 + std::sqrt(5.0) + 5.0 / 3.0) * std::exp(-std::sqrt(5.0));
    CHECK(kernel_eval(spec, u, v) == doctest::Approx(expected).epsilon(1e-14));
    CHECK(kernel_eval(spec, u, v) == doctest::Approx(0.52399).epsilon(1e-4));

    Rng rng = make_rng(2);
    KernelSpec aniso{KernelFamily::Matern32, Eigen::VectorXd::Constant(3, 0.7), 1.0};
    for (int t = 0; t < 20; ++t) {
        Eigen::VectorXd a(3), b(3);
        for (int j = 0; j < 3; ++j) {
            a[j] = gaussian(rng);
            b[j] = gaussian(rng);
        }
        CHECK(kernel_eval(aniso, a, b) == kernel_eval(aniso, b, a));
        CHECK(kernel_eval(aniso, a, b) > 0.0);
        CHECK(kernel_eval(aniso, a, b) <= 1.0);
    }
}

TEST_CASE("concentrated log-likelihood closed forms") {
    const Eigen::MatrixXd x = random_inputs(6, 2, 3);
    const Eigen::VectorXd theta = Eigen::VectorXd::Constant(2, 0.8);

    SUBCASE("constant outputs") {
        const Eigen::VectorXd y = Eigen::VectorXd::Constant(6, 4.2);
        const ConcentratedLoglik ll = concentrated_loglik(x, y, theta, KernelFamily::Matern52, 0.0);
        CHECK(ll.beta_hat == doctest::Approx(4.2).epsilon(1e-10));
        CHECK(ll.sigma2_hat == doctest::Approx(0.0));
    }

    SUBCASE("dense-algebra oracle, n = 3") {
        const Eigen::MatrixXd x3 = random_inputs(3, 2, 5);
        Eigen::VectorXd y(3);
        y << 0.4, -1.1, 2.0;
        const ConcentratedLoglik ll = concentrated_loglik(x3, y, theta, KernelFamily::Matern52, 0.0);
        const double oracle = dense_loglik_oracle(x3, y, theta, 0.0, ll.jitter_used);
        CHECK(ll.value == doctest::Approx(oracle).epsilon(1e-10));
    }

    SUBCASE("penalty linearity") {
        Rng rng = make_rng(6);
        Eigen::VectorXd y(6);
        for (int i = 0; i < 6; ++i) y[i] = gaussian(rng);
        const double lambda = 0.37;
        const double v0 = concentrated_loglik(x, y, theta, KernelFamily::Matern52, lambda).value;
        const double v1 = concentrated_loglik(x, y, theta, KernelFamily::Matern52, 2 * lambda).value;
        const double inv_theta_norm = (1.0 / theta.array()).sum();
        CHECK(v0 - v1 == doctest::Approx(lambda * inv_theta_norm).epsilon(1e-10));
    }

    SUBCASE("row order does not matter") {
        Rng rng = make_rng(7);
        Eigen::VectorXd y(6);
        for (int i = 0; i < 6; ++i) y[i] = gaussian(rng);
        Eigen::MatrixXd xp = x;
        Eigen::VectorXd yp = y;
        std::swap(yp[0], yp[4]);
        xp.row(0).swap(xp.row(4));
        const double a = concentrated_loglik(x, y, theta, KernelFamily::Matern52, 0.0).value;
        const double b = concentrated_loglik(xp, yp, theta, KernelFamily::Matern52, 0.0).value;
        CHECK(a == doctest::Approx(b).epsilon(1e-9));
    }
}

TEST_CASE("likelihood gradient matches finite differences") {
    const Eigen::MatrixXd x = random_inputs(12, 3, 11);
    Rng rng = make_rng(12);
    Eigen::VectorXd y(12);
    for (int i = 0; i < 12; ++i) y[i] = std::sin(2.0 * x(i, 0)) + 0.3 * gaussian(rng);

    Eigen::VectorXd theta(3);
    theta << 0.6, 1.4, 0.9;
    const double lambda = 0.8;

    Eigen::VectorXd grad;
    concentrated_loglik(x, y, theta, KernelFamily::Matern52, lambda, 1e-10, &grad);

    for (int j = 0; j < 3; ++j) {
        const double h = 1e-6;
        Eigen::VectorXd tp = theta, tm = theta;
        tp[j] *= std::exp(h);
        tm[j] *= std::exp(-h);
        const double fp = concentrated_loglik(x, y, tp, KernelFamily::Matern52, lambda).value;
        const double fm = concentrated_loglik(x, y, tm, KernelFamily::Matern52, lambda).value;
        const double fd = (fp - fm) / (2.0 * h);
        CHECK(grad[j] == doctest::Approx(fd).epsilon(1e-5));
    }
}

TEST_CASE("fitting recovers known lengthscales within a factor of two") {
    const Eigen::VectorXd theta_true = (Eigen::VectorXd(2) << 0.3, 2.0).finished();
    std::vector<double> ratio0, ratio1;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const Eigen::MatrixXd x = random_inputs(120, 2, seed, -1.0, 1.0);
        // sample from the GP with the known kernel
        Eigen::MatrixXd k = corr_matrix(KernelFamily::Matern52, x, theta_true);
        k.diagonal().array() += 1e-10;
        const Eigen::MatrixXd chol = k.llt().matrixL();
        Rng rng = make_rng(seed, 77);
        Eigen::VectorXd z(120);
        for (int i = 0; i < 120; ++i) z[i] = gaussian(rng);
        const Eigen::VectorXd y = chol * z;

        FitOptions opts;
        opts.seed = seed;
        const GpModel model = fit_gp(x, y, KernelFamily::Matern52, 0.0, opts);
        ratio0.push_back(model.kernel.lengthscales[0] / theta_true[0]);
        ratio1.push_back(model.kernel.lengthscales[1] / theta_true[1]);
    }
    std::sort(ratio0.begin(), ratio0.end());
    std::sort(ratio1.begin(), ratio1.end());
    CHECK(ratio0[2] > 0.5);
    CHECK(ratio0[2] < 2.0);
    CHECK(ratio1[2] > 0.5);
    CHECK(ratio1[2] < 2.0);
}

TEST_CASE("fit handles constant data and improves on its starts") {
    const Eigen::MatrixXd x = random_inputs(8, 2, 31);
    const Eigen::VectorXd yc = Eigen::VectorXd::Constant(8, -1.5);
    FitOptions opts;
    const GpModel constant = fit_gp(x, yc, KernelFamily::Matern52, 0.0, opts);
    CHECK(constant.kernel.variance == doctest::Approx(0.0));
    CHECK(predict(constant, x.row(3).transpose()).mean == doctest::Approx(-1.5).epsilon(1e-9));
    CHECK(predict(constant, x.row(3).transpose()).var == doctest::Approx(0.0));

    Rng rng = make_rng(32);
    Eigen::VectorXd y(8);
    for (int i = 0; i < 8; ++i) y[i] = gaussian(rng);
    const GpModel model = fit_gp(x, y, KernelFamily::Matern52, 0.0, opts);

    // heuristic initialization: theta at the coordinate ranges
    Eigen::VectorXd theta0(2);
    for (int j = 0; j < 2; ++j) theta0[j] = x.col(j).maxCoeff() - x.col(j).minCoeff();
    const double at_start = concentrated_loglik(x, y, theta0, KernelFamily::Matern52, 0.0).value;
    CHECK(model.loglik >= at_start - 1e-9);
}

TEST_CASE("prediction interpolates and reverts to the prior") {
    const Eigen::MatrixXd x = random_inputs(5, 1, 41, 0.0, 1.0);
    Rng rng = make_rng(42);
    Eigen::VectorXd y(5);
    for (int i = 0; i < 5; ++i) y[i] = std::cos(3.0 * x(i, 0)) + 0.1 * gaussian(rng);

    KernelSpec kernel{KernelFamily::Matern52, Eigen::VectorXd::Constant(1, 0.5),
                      (y.array() - y.mean()).square().sum() / 5.0};
    const GpModel model = make_gp(x, y, kernel, 1e-12);
    const double sd_y = std::sqrt((y.array() - y.mean()).square().sum() / 5.0);
    for (int i = 0; i < 5; ++i) {
        const Prediction p = predict(model, x.row(i).transpose());
        CHECK(std::abs(p.mean - y[i]) < 1e-6 * sd_y);
        CHECK(p.var <= 1e-8 * kernel.variance);
    }

    Eigen::VectorXd far(1);
    far << 1e4;
    const Prediction p = predict(model, far);
    CHECK(p.mean == doctest::Approx(model.beta_hat).epsilon(1e-12));
    CHECK(p.var == doctest::Approx(kernel.variance).epsilon(1e-12));
}

TEST_CASE("prediction matches a dense-algebra oracle on three points") {
    Eigen::MatrixXd x(3, 1);
    x << 0.0, 0.45, 1.0;
    Eigen::VectorXd y(3);
    y << 1.0, -0.2, 0.7;
    KernelSpec kernel{KernelFamily::Matern52, Eigen::VectorXd::Constant(1, 0.4), 0.9};
    const double jitter = 1e-10;
    const GpModel model = make_gp(x, y, kernel, jitter);

    Eigen::VectorXd q(1);
    q << 0.3;
    const Prediction p = predict(model, q);

    Eigen::MatrixXd r(3, 3);
    Eigen::VectorXd kv(3);
    for (int i = 0; i < 3; ++i) {
        kv[i] = kernel.variance * kernel_eval(kernel, q, x.row(i).transpose());
        for (int j = 0; j < 3; ++j)
            r(i, j) = kernel_eval(kernel, x.row(i).transpose(), x.row(j).transpose());
    }
    r.diagonal().array() += jitter;
    const Eigen::MatrixXd kmat = kernel.variance * r;
    const Eigen::MatrixXd kinv = kmat.inverse();
    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(3);
    const double beta = ones.dot(kinv * y) / ones.dot(kinv * ones);
    const double mean = beta + kv.dot(kinv * (y - beta * ones));
    const double var = kernel.variance - kv.dot(kinv * kv);
    CHECK(p.mean == doctest::Approx(mean).epsilon(1e-10));
    CHECK(p.var == doctest::Approx(var).epsilon(1e-10));
}

TEST_CASE("prediction gradients") {
    SUBCASE("finite differences on random queries") {
        const Eigen::MatrixXd x = random_inputs(15, 2, 51);
        Rng rng = make_rng(52);
        Eigen::VectorXd y(15);
        for (int i = 0; i < 15; ++i) y[i] = std::sin(3.0 * x(i, 0)) * std::cos(x(i, 1));
        KernelSpec kernel{KernelFamily::Matern52, (Eigen::VectorXd(2) << 0.5, 0.8).finished(), 1.2};
        const GpModel model = make_gp(x, y, kernel, 1e-10);

        for (int t = 0; t < 10; ++t) {
            Eigen::VectorXd q(2);
            q << uniform(rng, -0.9, 0.9), uniform(rng, -0.9, 0.9);
            Eigen::VectorXd dm, ds;
            predict_gradient(model, q, dm, ds);
            for (int j = 0; j < 2; ++j) {
                const double h = 1e-5;
                Eigen::VectorXd qp = q, qm = q;
                qp[j] += h;
                qm[j] -= h;
                const Prediction pp = predict(model, qp);
                const Prediction pm = predict(model, qm);
                const double fd_m = (pp.mean - pm.mean) / (2 * h);
                const double fd_s = (pp.sd() - pm.sd()) / (2 * h);
                CHECK(dm[j] == doctest::Approx(fd_m).epsilon(1e-5));
                CHECK(ds[j] == doctest::Approx(fd_s).epsilon(2e-5));
            }
        }
    }

    SUBCASE("symmetric design gives a flat sd at the symmetry point") {
        Eigen::MatrixXd x(2, 1);
        x << -1.0, 1.0;
        Eigen::VectorXd y(2);
        y << 0.7, 0.7;
        KernelSpec kernel{KernelFamily::Matern52, Eigen::VectorXd::Constant(1, 1.0), 1.0};
        const GpModel model = make_gp(x, y, kernel, 1e-10);
        Eigen::VectorXd dm, ds;
        predict_gradient(model, Eigen::VectorXd::Zero(1), dm, ds);
        CHECK(std::abs(ds[0]) < 1e-12);
        CHECK(std::abs(dm[0]) < 1e-12);
    }

    SUBCASE("isotropic two-point mean gradient stays in the data-difference plane") {
        Eigen::MatrixXd x(2, 3);
        x << 0.0, 0.0, 0.0, 1.0, 0.5, -0.2;
        Eigen::VectorXd y(2);
        y << 1.0, -1.0;
        KernelSpec kernel{KernelFamily::Matern52, Eigen::VectorXd::Constant(1, 0.9), 1.0};
        const GpModel model = make_gp(x, y, kernel, 1e-10);
        Eigen::VectorXd q(3);
        q << 0.3, 0.2, 0.4;
        Eigen::VectorXd dm, ds;
        predict_gradient(model, q, dm, ds);
        // grad m = sum_i c_i (q - x_i): check it is orthogonal to the normal
        // of span{q - x_0, q - x_1}
        const Eigen::Vector3d a = (q - x.row(0).transpose()).head<3>();
        const Eigen::Vector3d b = (q - x.row(1).transpose()).head<3>();
        const Eigen::Vector3d normal = a.cross(b).normalized();
        CHECK(std::abs(normal.dot(dm)) < 1e-10 * dm.norm());
    }

    SUBCASE("zero variance signals an error") {
        Eigen::MatrixXd x(2, 1);
        x << 0.0, 1.0;
        Eigen::VectorXd y = Eigen::VectorXd::Zero(2);
        KernelSpec kernel{KernelFamily::Matern52, Eigen::VectorXd::Constant(1, 1.0), 0.0};
        const GpModel model = make_gp(x, y, kernel, 1e-10);
        Eigen::VectorXd dm, ds;
        CHECK_THROWS_AS(predict_gradient(model, Eigen::VectorXd::Constant(1, 0.5), dm, ds),
                        std::domain_error);
    }
}

TEST_CASE("variance bounds and information monotonicity") {
    Rng rng = make_rng(61);
    Eigen::MatrixXd x = random_inputs(10, 1, 62, 0.0, 1.0);
    Eigen::VectorXd y(10);
    for (int i = 0; i < 10; ++i) y[i] = std::sin(6.0 * x(i, 0));
    KernelSpec kernel{KernelFamily::Matern52, Eigen::VectorXd::Constant(1, 0.3), 1.0};
    const GpModel small = make_gp(x.topRows(6), y.head(6), kernel, 1e-10);
    const GpModel big = make_gp(x.topRows(7), y.head(7), kernel, 1e-10);

    for (int t = 0; t < 50; ++t) {
        Eigen::VectorXd q(1);
        q << uniform(rng, 0.0, 1.0);
        const double v_small = predict(small, q).var;
        const double v_big = predict(big, q).var;
        CHECK(v_small >= 0.0);
        CHECK(v_small <= kernel.variance * (1.0 + 1e-10) + 1e-10);
        CHECK(v_big <= v_small + 1e-9); // adding an observation cannot add variance
    }
}
