#include <doctest.h>

#include <cmath>
#include <numbers>

#include "shapebo/shapes.hpp"

using namespace shapebo;

namespace {

constexpr double kPi = std::numbers::pi;

GridSpec single_point_grid(double x, double y) { return GridSpec{1, 1, x, x, y, y}; }

DesignVector make_design(ProblemId id, std::initializer_list<double> vals) {
    DesignVector x;
    x.problem = id;
    x.values = Eigen::Map<const Eigen::VectorXd>(vals.begin(), static_cast<Eigen::Index>(vals.size()));
    return x;
}

Polyline circle_poly(double cx, double cy, double r, int m) {
    Polyline p;
    p.closed = true;
    for (int k = 0; k < m; ++k) {
        const double a = 2.0 * kPi * k / m;
        p.pts.push_back({cx + r * std::cos(a), cy + r * std::sin(a)});
    }
    return p;
}

} // namespace

TEST_CASE("circle families produce the expected geometry") {
    const DesignVector x = make_design(ProblemId::Circle3, {0.0, 0.0, 1.0});
    const ContourShape shape = generate_shape(x);
    REQUIRE(shape.parts.size() == 1);
    for (const Vec2& p : shape.parts.front().pts)
        CHECK(std::hypot(p.x, p.y) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("over-parameterized circle collapses to its sums") {
    DesignVector x;
    x.problem = ProblemId::OverCircle;
    x.values = Eigen::VectorXd::Zero(39);
    x.values[0] = 3.0;
    x.values[13] = 2.0;
    x.values[26] = 1.0;
    const CircleParams c = circle_params(x);
    CHECK(c.cx == doctest::Approx(3.0));
    CHECK(c.cy == doctest::Approx(2.0));
    CHECK(c.r == doctest::Approx(1.0));

    // equal (s, t, r) triples give identical representations under all
    // mappings; the split uses binary-exact values so the sums agree bitwise
    DesignVector x2 = x;
    x2.values[0] = 2.9375;
    x2.values[1] = 0.03125;
    x2.values[2] = 0.03125;
    const MappingSpec contour = default_mapping(ProblemId::OverCircle, Mapping::Contour);
    CHECK(shape_representation(x, contour) == shape_representation(x2, contour));
    const MappingSpec chi = default_mapping(ProblemId::OverCircle, Mapping::Characteristic);
    CHECK(shape_representation(x, chi) == shape_representation(x2, chi));
    const MappingSpec sdf = default_mapping(ProblemId::OverCircle, Mapping::SignedDistance);
    CHECK(shape_representation(x, sdf) == shape_representation(x2, sdf));
}

TEST_CASE("catenoid with zero perturbations is the straight segment") {
    DesignVector x;
    x.problem = ProblemId::Catenoid;
    x.values = Eigen::VectorXd::Zero(29);
    const ContourShape shape = generate_shape(x);
    const CatenoidConfig& cfg = catenoid_config();
    CHECK_FALSE(shape.closed);
    for (const Vec2& p : shape.parts.front().pts) {
        const double line = cfg.ya + (cfg.yb - cfg.ya) * p.x;
        CHECK(p.y == doctest::Approx(line).epsilon(1e-14));
    }
    CHECK(shape.parts.front().pts.front().x == doctest::Approx(0.0));
    CHECK(shape.parts.front().pts.back().x == doctest::Approx(1.0));
}

TEST_CASE("design validation rejects bad inputs") {
    DesignVector wrong;
    wrong.problem = ProblemId::Circle1;
    wrong.values = Eigen::VectorXd::Zero(2);
    CHECK_THROWS_AS(generate_shape(wrong), std::invalid_argument);

    DesignVector out_of_bounds = make_design(ProblemId::Circle1, {17.0});
    CHECK_THROWS_AS(generate_shape(out_of_bounds), std::invalid_argument);
}

TEST_CASE("characteristic function marks interior points") {
    const ContourShape circle{{circle_poly(0, 0, 1, 4096)}, true};
    CHECK(map_characteristic(circle, single_point_grid(0, 0))[0] == 1.0);
    CHECK(map_characteristic(circle, single_point_grid(5, 5))[0] == 0.0);

    ContourShape open_curve;
    open_curve.closed = false;
    open_curve.parts.push_back({{{0, 0}, {1, 1}}, false});
    CHECK_THROWS_AS(map_characteristic(open_curve, single_point_grid(0, 0)),
                    std::invalid_argument);
}

TEST_CASE("characteristic fraction of the unit circle matches its area") {
    const ContourShape circle{{circle_poly(0, 0, 1, 4096)}, true};
    const GridSpec grid{64, 64, -2, 2, -2, 2};
    const Eigen::VectorXd chi = map_characteristic(circle, grid);
    const double fraction = chi.sum() / grid.size();
    CHECK(std::abs(fraction - kPi / 16.0) / (kPi / 16.0) < 0.03);

    // brute-force area count on a 10x finer grid
    const GridSpec fine{640, 640, -2, 2, -2, 2};
    int inside = 0;
    for (int j = 0; j < fine.size(); ++j) {
        const Vec2 p = fine.point(j);
        if (p.x * p.x + p.y * p.y < 1.0) ++inside;
    }
    const double oracle = static_cast<double>(inside) / fine.size();
    CHECK(std::abs(fraction - oracle) < 0.015);
}

TEST_CASE("signed distance agrees with a dense contour sampling") {
    const ContourShape circle{{circle_poly(0, 0, 1, 4096)}, true};
    CHECK(map_signed_distance(circle, single_point_grid(0, 0))[0] ==
          doctest::Approx(1.0).epsilon(1e-5));
    CHECK(map_signed_distance(circle, single_point_grid(2, 0))[0] ==
          doctest::Approx(-1.0).epsilon(1e-5));

    // dense-sampling oracle at a random grid point
    const Vec2 q{0.83, -0.41};
    const double sd = map_signed_distance(circle, single_point_grid(q.x, q.y))[0];
    const Polyline& poly = circle.parts.front();
    double best = 1e300;
    const int samples_per_seg = 25; // ~1e5 points on the contour
    for (std::size_t s = 0; s < poly.pts.size(); ++s) {
        const Vec2& a = poly.pts[s];
        const Vec2& b = poly.pts[(s + 1) % poly.pts.size()];
        for (int k = 0; k < samples_per_seg; ++k) {
            const Vec2 p = a + (static_cast<double>(k) / samples_per_seg) * (b - a);
            best = std::min(best, norm(q - p));
        }
    }
    const double inside = std::hypot(q.x, q.y) < 1.0 ? 1.0 : -1.0;
    CHECK(sd == doctest::Approx(inside * best).epsilon(1e-6));
}

TEST_CASE("characteristic and signed distance agree on sign") {
    Rng rng = make_rng(99);
    for (int trial = 0; trial < 5; ++trial) {
        const DesignVector x = sample_design(ProblemId::Circle3, rng);
        const ContourShape shape = generate_shape(x);
        const GridSpec grid = problem_info(ProblemId::Circle3).default_grid;
        const Eigen::VectorXd chi = map_characteristic(shape, grid);
        const Eigen::VectorXd sd = map_signed_distance(shape, grid);
        for (int j = 0; j < grid.size(); ++j) {
            if (sd[j] == 0.0) continue;
            CHECK((chi[j] == 1.0) == (sd[j] > 0.0));
        }
    }
}

TEST_CASE("contour resampling hits exact quarter points of a circle") {
    const DesignVector x = make_design(ProblemId::Circle3, {0.5, -0.25, 2.0});
    const Eigen::VectorXd rep = map_contour(generate_shape(x), 4);
    REQUIRE(rep.size() == 8);
    CHECK(rep[0] == doctest::Approx(0.5 + 2.0).epsilon(1e-12));
    CHECK(rep[1] == doctest::Approx(-0.25).epsilon(1e-12));
    CHECK(rep[2] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(rep[3] == doctest::Approx(-0.25 + 2.0).epsilon(1e-12));
    CHECK(rep[4] == doctest::Approx(0.5 - 2.0).epsilon(1e-12));
    CHECK(rep[5] == doctest::Approx(-0.25).epsilon(1e-12));
    CHECK(rep[6] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(rep[7] == doctest::Approx(-0.25 - 2.0).epsilon(1e-12));

    // determinism
    CHECK(map_contour(generate_shape(x), 4) == rep);
}

TEST_CASE("contour representation is stable under polyline refinement") {
    const ContourShape coarse{{circle_poly(0.3, 0.1, 1.0, 3000)}, true};
    const ContourShape fine{{circle_poly(0.3, 0.1, 1.0, 6000)}, true};
    const Eigen::VectorXd a = map_contour(coarse, 200);
    const Eigen::VectorXd b = map_contour(fine, 200);
    CHECK((a - b).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("concentric circles differ by a pure dilation") {
    const MappingSpec spec = default_mapping(ProblemId::Circle1, Mapping::Contour);
    const Eigen::VectorXd r1 = shape_representation(make_design(ProblemId::Circle1, {1.0}), spec);
    const Eigen::VectorXd r2 = shape_representation(make_design(ProblemId::Circle1, {2.0}), spec);
    CHECK((r2 - r1).norm() == doctest::Approx(std::sqrt(spec.num_points)).epsilon(1e-12));
}

TEST_CASE("rectangle representation is affine in the parameters") {
    Rng rng = make_rng(4);
    const MappingSpec spec = default_mapping(ProblemId::Rectangle, Mapping::Contour);
    const DesignVector a = sample_design(ProblemId::Rectangle, rng);
    const DesignVector b = sample_design(ProblemId::Rectangle, rng);
    const Eigen::VectorXd mid_params = 0.5 * (a.values + b.values);
    const Eigen::VectorXd lhs =
        shape_representation(DesignVector{ProblemId::Rectangle, mid_params}, spec);
    const Eigen::VectorXd rhs = 0.5 * (shape_representation(a, spec) + shape_representation(b, spec));
    CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("three circles split into equal blocks") {
    Rng rng = make_rng(5);
    const DesignVector x = sample_design(ProblemId::ThreeCircles, rng);
    const MappingSpec spec = default_mapping(ProblemId::ThreeCircles, Mapping::Contour);
    const Eigen::VectorXd rep = shape_representation(x, spec);
    REQUIRE(rep.size() == 2 * spec.num_points);
    const int block = 2 * spec.num_points / 3;
    for (int c = 0; c < 3; ++c) {
        const CircleParams p = circle_params(x, c);
        for (int k = 0; k < block / 2; ++k) {
            const double px = rep[c * block + 2 * k];
            const double py = rep[c * block + 2 * k + 1];
            CHECK(std::hypot(px - p.cx, py - p.cy) == doctest::Approx(p.r).epsilon(1e-12));
        }
    }
}

TEST_CASE("naca airfoils are closed and bump parameters deform them") {
    DesignVector base;
    base.problem = ProblemId::Naca22;
    base.values = Eigen::VectorXd::Zero(22);
    base.values[0] = 0.04;
    base.values[1] = 0.4;
    base.values[2] = 0.12;
    const MappingSpec spec = default_mapping(ProblemId::Naca22, Mapping::Contour);
    const Eigen::VectorXd rep0 = shape_representation(base, spec);

    DesignVector bumped = base;
    bumped.values[3] = 0.004; // first upper-surface bump
    const Eigen::VectorXd rep1 = shape_representation(bumped, spec);
    CHECK((rep1 - rep0).norm() > 1e-4);
    CHECK(generate_shape(base).closed);
}

TEST_CASE("database building is deterministic and respects the envelope") {
    const MappingSpec spec = default_mapping(ProblemId::Catenoid, Mapping::Contour);
    const ShapeDatabase a = build_database(ProblemId::Catenoid, 64, spec, 11);
    const ShapeDatabase b = build_database(ProblemId::Catenoid, 64, spec, 11);
    CHECK(a.phi == b.phi);
    CHECK(a.designs == b.designs);
    CHECK((a.designs.array().abs() <= catenoid_config().envelope_half_width).all());

    const ShapeDatabase c = build_database(ProblemId::Circle1, 40, spec, 3);
    for (int i = 1; i < c.phi.rows(); ++i) CHECK((c.phi.row(i) - c.phi.row(0)).norm() > 0.0);

    // the GP envelope sampler belongs to the catenoid family only
    CHECK_THROWS_AS(build_database(ProblemId::Circle1, 16, spec, 3, SamplerSpec::GpEnvelope),
                    std::invalid_argument);
}
