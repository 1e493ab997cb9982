#include <doctest.h>

#include <cmath>
#include <numbers>

#include "shapebo/bench.hpp"

using namespace shapebo;

TEST_CASE("r2 definitions") {
    Eigen::VectorXd y(3);
    y << 1.0, 2.0, 4.0;
    CHECK(r2_score(y, y) == doctest::Approx(1.0));
    CHECK(r2_score(Eigen::VectorXd::Constant(3, y.mean()), y) == doctest::Approx(0.0));

    Eigen::VectorXd m(3);
    m << 1.0, 2.0, 3.0;
    CHECK(r2_score(m, y) == doctest::Approx(11.0 / 14.0));

    CHECK_THROWS_AS(r2_score(m, Eigen::VectorXd::Constant(3, 2.0)), std::invalid_argument);
}

TEST_CASE("objective values at known points") {
    // f2 with the collapsed center (3, 2) and radius 1
    DesignVector circle;
    circle.problem = ProblemId::OverCircle;
    circle.values = Eigen::VectorXd::Zero(39);
    circle.values[0] = 3.0;
    circle.values[13] = 2.0;
    circle.values[26] = 1.0;
    const Objective f2 = make_objective(ProblemId::OverCircle);
    CHECK(eval_objective(f2, circle) == doctest::Approx(1.0 - std::numbers::pi).epsilon(1e-12));

    // fmg vanishes at (0, 0, c, 0, ...)
    DesignVector g;
    g.problem = ProblemId::Griewank;
    g.values = Eigen::VectorXd::Zero(40);
    const double c[8] = {-140, -100, -60, -20, 20, 60, 100, 140};
    for (int j = 0; j < 8; ++j) g.values[2 + j] = c[j];
    const Objective fmg = make_objective(ProblemId::Griewank);
    CHECK(eval_objective(fmg, g) == doctest::Approx(0.0).epsilon(1e-14));

    DesignVector outside = g;
    outside.values[0] = 700.0;
    CHECK_THROWS_AS(eval_objective(fmg, outside), std::invalid_argument);

    // f4 at the (arbitrarily translated) target is zero
    const Objective f4 = make_objective(ProblemId::Rectangle);
    DesignVector heart{ProblemId::Rectangle, heart_target_params()};
    CHECK(eval_objective(f4, heart) == doctest::Approx(0.0));
    DesignVector shifted = heart;
    shifted.values[0] = 0.7;
    shifted.values[1] = 4.2;
    CHECK(eval_objective(f4, shifted) == doctest::Approx(0.0));
    DesignVector other = heart;
    other.values[2] = 3.7;
    CHECK(eval_objective(f4, other) > 0.1);
}

TEST_CASE("surface of revolution quadrature") {
    // radius-1 cylinder over a unit parameter span
    Polyline cylinder;
    cylinder.closed = false;
    cylinder.pts = {{0.0, 1.0}, {1.0, 1.0}};
    CHECK(std::abs(surface_of_revolution(cylinder, 2000) - 2.0 * std::numbers::pi) < 1e-6);
    CHECK(std::abs(surface_of_revolution(cylinder, 2000) -
                   surface_of_revolution(cylinder, 1'000'000)) < 1e-6);

    // doubling the panel count changes a smooth curve by < 1e-6 relative
    Polyline smooth;
    smooth.closed = false;
    for (int k = 0; k <= 3000; ++k) {
        const double s = k / 3000.0;
        smooth.pts.push_back({s, 4.0 + 0.4 * std::cos(2.5 * s)});
    }
    const double v1 = surface_of_revolution(smooth, 2000);
    const double v2 = surface_of_revolution(smooth, 4000);
    CHECK(std::abs(v2 - v1) / std::abs(v2) < 1e-6);

    // the catenoid objective evaluates the generated curve; for the straight
    // line the lateral surface is 2 pi * mean height * segment length
    DesignVector straight;
    straight.problem = ProblemId::Catenoid;
    straight.values = Eigen::VectorXd::Zero(29);
    const Objective f5 = make_objective(ProblemId::Catenoid);
    const CatenoidConfig& cat = catenoid_config();
    const double line_surface = 2.0 * std::numbers::pi * 0.5 * (cat.ya + cat.yb) *
                                std::hypot(1.0, cat.yb - cat.ya);
    CHECK(eval_objective(f5, straight) == doctest::Approx(line_surface).epsilon(1e-9));
}

TEST_CASE("lift proxy responds to camber, not thickness") {
    DesignVector thin;
    thin.problem = ProblemId::Naca3;
    thin.values = (Eigen::VectorXd(3) << 0.02, 0.4, 0.10).finished();
    DesignVector cambered = thin;
    cambered.values[0] = 0.08;
    DesignVector thick = thin;
    thick.values[2] = 0.16;

    const double base = naca_lift_proxy(thin);
    const double d_camber = std::abs(naca_lift_proxy(cambered) - base);
    const double d_thick = std::abs(naca_lift_proxy(thick) - base);
    CHECK(d_camber > 10.0 * d_thick);
    CHECK(naca_lift_proxy(cambered) > naca_lift_proxy(thin)); // more camber, more lift
}

TEST_CASE("target statistics") {
    // all runs reach the target
    const TargetStat all = target_stat({24, 25, 23}, 3, 30.0);
    CHECK(all.value == doctest::Approx(24.0));
    CHECK(all.sd == doctest::Approx(1.0));
    CHECK(all.successes == 3);
    CHECK_FALSE(all.runtime_estimator);

    // 1 of 10 runs reaches it at evaluation 57: Ts/ps = 57 / 0.1
    const TargetStat one = target_stat({57}, 10, 30.0);
    CHECK(one.runtime_estimator);
    CHECK(one.value == doctest::Approx(570.0));
    CHECK(one.successes == 1);

    const TargetStat none = target_stat({}, 5, 30.0);
    CHECK(none.unreached);
}

TEST_CASE("metamodel benchmark smoke test with the skip rule") {
    R2BenchConfig cfg;
    cfg.problem = ProblemId::OverCircle;
    cfg.mapping = default_mapping(ProblemId::OverCircle, Mapping::Contour);
    cfg.sizes = {30};
    cfg.methods = {"gp-x", "gp-alpha-3"};
    cfg.runs = 2;
    cfg.test_size = 120;
    cfg.database_size = 400;
    cfg.fit.starts = 3;
    cfg.seed = 5;

    const std::vector<R2Row> rows = bench_metamodels(cfg);
    REQUIRE(rows.size() == 1); // gp-x skipped: 39 >= 30
    CHECK(rows[0].method == "gp-alpha-3");
    CHECK(rows[0].runs == 2);
    CHECK(rows[0].mean_r2 > 0.9);
}

TEST_CASE("interpolating a training set gives r2 close to one") {
    Rng rng = make_rng(8);
    Eigen::MatrixXd x(20, 2);
    Eigen::VectorXd y(20);
    for (int i = 0; i < 20; ++i) {
        x(i, 0) = uniform(rng, -1, 1);
        x(i, 1) = uniform(rng, -1, 1);
        y[i] = std::sin(x(i, 0)) + x(i, 1);
    }
    FitOptions opts;
    opts.seed = 2;
    const PlainGpSurrogate s(fit_gp(x, y, KernelFamily::Matern52, 0.0, opts));
    CHECK(r2_eval(s, x, y) > 0.999);
}

TEST_CASE("method descriptors translate into run configurations") {
    OptBenchConfig cfg;
    cfg.problem = ProblemId::Catenoid;
    cfg.mapping = default_mapping(ProblemId::Catenoid, Mapping::Contour);
    cfg.n0 = 20;
    cfg.iterations = 60;

    const RunConfig plain = method_run_config("gp-alpha-7", cfg);
    CHECK(plain.space == SpaceKind::EigenSpace);
    CHECK(plain.model_components == 7);
    CHECK(plain.replication);
    CHECK(plain.initial_doe == 20);

    const RunConfig norep = method_run_config("gp-alpha-7-norep", cfg);
    CHECK_FALSE(norep.replication);

    const RunConfig manifold = method_run_config("addgp-embed-onmanifold", cfg);
    CHECK(manifold.acquisition.domain == EiDomain::OnManifold);
    CHECK(manifold.acquisition.strategy == EiStrategy::Embed);
    CHECK(manifold.model == ModelKind::Additive);

    // high-dimensional plain GP shifts budget into the DoE
    const RunConfig gpx = method_run_config("gp-x", cfg);
    CHECK(gpx.space == SpaceKind::DirectSpace);
    CHECK(gpx.initial_doe == 40);
    CHECK(gpx.initial_doe + gpx.iterations == 80);

    OptBenchConfig gcfg;
    gcfg.problem = ProblemId::Griewank;
    gcfg.n0 = 20;
    gcfg.iterations = 80;
    const RunConfig sub = method_run_config("gp-x-sub2", gcfg);
    CHECK(sub.subset_dim == 2);
    CHECK(sub.initial_doe == 20);
    const RunConfig fixed = method_run_config("addgp-x-embed", gcfg);
    CHECK(fixed.selection_cadence == 0);
    CHECK(fixed.fixed_active == std::vector<int>{0, 1});
    const RunConfig big = method_run_config("gp-x", gcfg);
    CHECK(big.initial_doe == 50);
    CHECK(big.iterations == 50);
}
