#include <doctest.h>

#include <cmath>

#include "shapebo/eigenbasis.hpp"

using namespace shapebo;

namespace {

ShapeDatabase synthetic_db(const Eigen::MatrixXd& phi) {
    ShapeDatabase db;
    db.problem = ProblemId::Circle1; // d = 1; only used for the d' cap
    db.mapping = default_mapping(ProblemId::Circle1, Mapping::Contour);
    db.phi = phi;
    db.designs = Eigen::MatrixXd::Zero(phi.rows(), 1);
    return db;
}

} // namespace

TEST_CASE("pca matches a dense eigendecomposition oracle") {
    Rng rng = make_rng(17);
    Eigen::MatrixXd phi(6, 4);
    for (int i = 0; i < phi.size(); ++i) phi.data()[i] = gaussian(rng);

    const EigenBasis basis = pca_fit(synthetic_db(phi));

    // direct dense oracle on the covariance matrix
    const Eigen::VectorXd mean = phi.colwise().mean();
    const Eigen::MatrixXd centered = phi.rowwise() - mean.transpose();
    const Eigen::MatrixXd cov = centered.transpose() * centered / phi.rows();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
    Eigen::VectorXd expected = es.eigenvalues().reverse();

    REQUIRE(basis.eigenvalues.size() == 4);
    for (int j = 0; j < 4; ++j)
        CHECK(basis.eigenvalues[j] ==
              doctest::Approx(std::max(expected[j], 0.0)).epsilon(1e-10));
    CHECK((basis.eigenvectors.transpose() * basis.eigenvectors -
           Eigen::MatrixXd::Identity(basis.retained(), basis.retained()))
              .cwiseAbs()
              .maxCoeff() < 1e-10);
    CHECK(basis.mean_shape.isApprox(mean, 1e-12));
}

TEST_CASE("identical rows give a zero spectrum and the row as mean") {
    Eigen::MatrixXd phi(5, 8);
    Eigen::VectorXd row = Eigen::VectorXd::LinSpaced(8, 0.0, 1.4);
    for (int i = 0; i < 5; ++i) phi.row(i) = row.transpose();
    const EigenBasis basis = pca_fit(synthetic_db(phi));
    CHECK(basis.eigenvalues.cwiseAbs().maxCoeff() < 1e-12);
    CHECK(basis.mean_shape.isApprox(row, 1e-12));
}

TEST_CASE("covariance and gram routes agree on the nonzero spectrum") {
    const MappingSpec spec{Mapping::Contour, {}, 102};
    const ShapeDatabase db = build_database(ProblemId::Circle2, 48, spec, 5);
    const EigenBasis cov = pca_fit(db, PcaRoute::Covariance);
    const EigenBasis gram = pca_fit(db, PcaRoute::Gram);
    const double lam1 = cov.eigenvalues[0];
    for (int j = 0; j < 10; ++j) {
        if (cov.eigenvalues[j] < 1e-10 * lam1) break;
        CHECK(gram.eigenvalues[j] == doctest::Approx(cov.eigenvalues[j]).epsilon(1e-8));
    }
}

TEST_CASE("intrinsic dimension counts for the circle families") {
    const auto significant = [](ProblemId id, int n) {
        const MappingSpec spec = default_mapping(id, Mapping::Contour);
        const EigenBasis basis = pca_fit(build_database(id, n, spec, 1));
        int count = 0;
        for (int j = 0; j < basis.eigenvalues.size(); ++j)
            if (basis.eigenvalues[j] > 1e-8 * basis.eigenvalues[0]) ++count;
        return count;
    };
    CHECK(significant(ProblemId::Circle1, 300) == 1);
    CHECK(significant(ProblemId::Circle2, 300) == 2);
    CHECK(significant(ProblemId::Circle3, 300) == 3);
    CHECK(significant(ProblemId::OverCircle, 300) == 3);
    CHECK(significant(ProblemId::ThreeCircles, 300) == 9);
}

TEST_CASE("projection and reconstruction invert each other on the span") {
    const MappingSpec spec = default_mapping(ProblemId::Circle3, Mapping::Contour);
    const ShapeDatabase db = build_database(ProblemId::Circle3, 200, spec, 2);
    const EigenBasis basis = pca_fit(db);

    CHECK(project(basis, basis.mean_shape).cwiseAbs().maxCoeff() < 1e-10);

    Eigen::VectorXd phi = basis.mean_shape + 2.0 * basis.eigenvectors.col(0);
    const Eigen::VectorXd alpha = project(basis, phi);
    CHECK(alpha[0] == doctest::Approx(2.0).epsilon(1e-10));
    for (int j = 1; j < alpha.size(); ++j) CHECK(std::abs(alpha[j]) < 1e-9);

    // random point of the retained span reconstructs exactly
    Rng rng = make_rng(3);
    Eigen::VectorXd coef(basis.d_prime);
    for (int j = 0; j < coef.size(); ++j) coef[j] = gaussian(rng);
    phi = reconstruct(basis, coef, basis.d_prime);
    CHECK((reconstruct(basis, project(basis, phi), basis.d_prime) - phi).norm() < 1e-9);
    CHECK((project(basis, reconstruct(basis, coef, basis.d_prime)) - coef).norm() < 1e-9);

    CHECK(reconstruct(basis, Eigen::VectorXd::Zero(basis.d_prime), basis.d_prime)
              .isApprox(basis.mean_shape, 1e-12));
    CHECK_THROWS_AS(reconstruct(basis, coef, basis.retained() + 1), std::invalid_argument);
}

TEST_CASE("frobenius reconstruction identity") {
    const MappingSpec spec = default_mapping(ProblemId::Catenoid, Mapping::Contour);
    const ShapeDatabase db = build_database(ProblemId::Catenoid, 300, spec, 7);
    const EigenBasis basis = pca_fit(db);
    const int delta = 4;

    double frob2 = 0.0;
    for (int i = 0; i < db.phi.rows(); ++i) {
        const Eigen::VectorXd alpha = project(basis, db.phi.row(i).transpose(), basis.retained());
        const Eigen::VectorXd rec = reconstruct(basis, alpha, delta);
        frob2 += (db.phi.row(i).transpose() - rec).squaredNorm();
    }
    const double tail = basis.eigenvalues.tail(basis.eigenvalues.size() - delta).sum();
    CHECK(frob2 == doctest::Approx(db.phi.rows() * tail).epsilon(1e-8));
}

TEST_CASE("effective dimension policies") {
    EigenBasis basis;
    basis.eigenvalues.resize(3);
    basis.eigenvalues << 1.0, 0.0, 0.0;
    CHECK(effective_dim(basis, 3, {DimensionPolicy::Kind::CumulativeShare, 1.0}) == 1);

    // catenoid-like spectrum (cumulative percentages 50.258, ..., 99.975 at 7)
    EigenBasis catenoid;
    catenoid.eigenvalues.resize(10);
    catenoid.eigenvalues << 2.156, 1.251, 0.590, 0.206, 0.065, 0.017, 0.004, 0.0008, 0.0001, 0.00005;
    CHECK(effective_dim(catenoid, 29, {DimensionPolicy::Kind::CumulativeShare, 0.9997}) == 7);

    EigenBasis zero;
    zero.eigenvalues = Eigen::VectorXd::Zero(4);
    CHECK_THROWS_AS(effective_dim(zero, 4, {}), std::invalid_argument);
}

TEST_CASE("manifold statistics on a hand-enumerable sample") {
    Eigen::MatrixXd phi(3, 1);
    phi << 0.0, 1.0, 3.0;
    ShapeDatabase db = synthetic_db(phi);
    EigenBasis basis = pca_fit(db);
    basis.d_prime = 1;
    const ManifoldStats stats = manifold_stats(basis, db);

    // nearest-neighbor distances {1, 1, 2}; d95 is the upper empirical quantile
    CHECK(stats.d95 == doctest::Approx(2.0));
    CHECK(stats.d0 == doctest::Approx(1.0));
    CHECK(stats.box_hi[0] - stats.box_lo[0] == doctest::Approx(3.0));

    // membership: all samples are members; the boundary case uses <=
    for (int i = 0; i < 3; ++i)
        CHECK(is_on_manifold(stats, stats.alphas.row(i).transpose()));
    Eigen::VectorXd boundary(1);
    boundary << stats.alphas.col(0).maxCoeff() + 2.0;
    CHECK(is_on_manifold(stats, boundary));
    Eigen::VectorXd far(1);
    far << stats.alphas.col(0).maxCoeff() + 10.0 * (stats.d95 + 3.0);
    CHECK_FALSE(is_on_manifold(stats, far));

    Eigen::MatrixXd dup(3, 2);
    dup << 0, 0, 0, 0, 1, 1;
    const ShapeDatabase dup_db = synthetic_db(dup);
    CHECK(manifold_stats(pca_fit(dup_db), dup_db).d0 == doctest::Approx(0.0));
}

TEST_CASE("pre-image recovers designs and projects off-manifold points") {
    const MappingSpec spec = default_mapping(ProblemId::Circle1, Mapping::Contour);
    const ShapeDatabase db = build_database(ProblemId::Circle1, 150, spec, 21);
    const EigenBasis basis = pca_fit(db);

    // exact pre-image exists
    DesignVector x0{ProblemId::Circle1, Eigen::VectorXd::Constant(1, 1.73)};
    const Eigen::VectorXd phi0 = shape_representation(x0, spec);
    const Eigen::VectorXd alpha0 = project(basis, phi0);
    const PreImageResult exact = pre_image(basis, alpha0, ProblemId::Circle1, spec, &db, 3);
    CHECK(exact.residual < 1e-6);
    CHECK((shape_representation(exact.x, spec) - phi0).norm() < 1e-5);

    // off-manifold target vs a grid-search oracle over the radius
    Eigen::VectorXd alpha_star = alpha0;
    alpha_star[0] += 3.0; // push it outside the feasible radius range
    const PreImageResult off = pre_image(basis, alpha_star, ProblemId::Circle1, spec, &db, 4);
    const Eigen::VectorXd target = basis.mean_shape + basis.eigenvectors.leftCols(alpha_star.size()) * alpha_star;
    double best_r = 0.5, best_res = 1e300;
    for (int g = 0; g < 10000; ++g) {
        const double r = 0.5 + 2.5 * g / 9999.0;
        DesignVector xg{ProblemId::Circle1, Eigen::VectorXd::Constant(1, r)};
        const double res = (shape_representation(xg, spec) - target).norm();
        if (res < best_res) {
            best_res = res;
            best_r = r;
        }
    }
    CHECK(off.x.values[0] == doctest::Approx(best_r).epsilon(1e-3));
    CHECK(off.residual <= best_res + 1e-6);

    // alpha = 0 resolves to the design closest to the mean shape; the grid
    // search only bounds the residual from above (its resolution is finite)
    const PreImageResult at_mean =
        pre_image(basis, Eigen::VectorXd::Zero(basis.d_prime), ProblemId::Circle1, spec, &db, 5);
    double best_mean_res = 1e300;
    for (int g = 0; g < 10000; ++g) {
        const double r = 0.5 + 2.5 * g / 9999.0;
        DesignVector xg{ProblemId::Circle1, Eigen::VectorXd::Constant(1, r)};
        best_mean_res = std::min(best_mean_res,
                                 (shape_representation(xg, spec) - basis.mean_shape).norm());
    }
    CHECK(at_mean.residual <= best_mean_res + 1e-9);
}

TEST_CASE("equivalent kernel identities") {
    const MappingSpec spec = default_mapping(ProblemId::Circle2, Mapping::Contour);
    const ShapeDatabase db = build_database(ProblemId::Circle2, 120, spec, 8);
    const EigenBasis basis = pca_fit(db);

    Rng rng = make_rng(12);
    const DesignVector a = sample_design(ProblemId::Circle2, rng);
    const DesignVector b = sample_design(ProblemId::Circle2, rng);

    const Eigen::VectorXd pa = shape_representation(a, spec);
    const Eigen::VectorXd pb = shape_representation(b, spec);

    CHECK(equivalent_kernel(basis, a, a, spec) ==
          doctest::Approx((pa - basis.mean_shape).squaredNorm()).epsilon(1e-12));
    CHECK(equivalent_kernel(basis, a, b, spec) ==
          doctest::Approx((pa - basis.mean_shape).dot(pb - basis.mean_shape)).epsilon(1e-9));

    // Parseval over the full retained basis
    const Eigen::VectorXd aa = project(basis, pa, basis.retained());
    const Eigen::VectorXd ab = project(basis, pb, basis.retained());
    CHECK(equivalent_kernel(basis, a, b, spec) == doctest::Approx(aa.dot(ab)).epsilon(1e-8));
}
