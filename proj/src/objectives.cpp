#include "shapebo/objectives.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace shapebo {

namespace {

constexpr double kPi = std::numbers::pi;

double griewank2(double x1, double x2) {
    return (x1 * x1 + x2 * x2) / 4000.0 - std::cos(x1) * std::cos(x2 / std::numbers::sqrt2) + 1.0;
}

const Eigen::VectorXd& sphere_center() {
    static const Eigen::VectorXd c = [] {
        Eigen::VectorXd v(8);
        v << -140, -100, -60, -20, 20, 60, 100, 140;
        return v;
    }();
    return c;
}

// piecewise-linear interpolation of the curve ordinate at abscissa s
double interp_open(const std::vector<Vec2>& pts, double s) {
    if (s <= pts.front().x) return pts.front().y;
    if (s >= pts.back().x) return pts.back().y;
    std::size_t lo = 0, hi = pts.size() - 1;
    while (hi - lo > 1) {
        const std::size_t mid = (lo + hi) / 2;
        if (pts[mid].x <= s) lo = mid;
        else hi = mid;
    }
    const double t = (s - pts[lo].x) / (pts[hi].x - pts[lo].x);
    return (1.0 - t) * pts[lo].y + t * pts[hi].y;
}

} // namespace

ObjectiveId objective_from_name(const std::string& name) {
    if (name == "f2") return ObjectiveId::F2;
    if (name == "f4") return ObjectiveId::F4;
    if (name == "f5") return ObjectiveId::F5;
    if (name == "fmg" || name == "f-mg") return ObjectiveId::FMG;
    throw std::invalid_argument("unknown objective '" + name + "'");
}

std::string objective_name(ObjectiveId id) {
    switch (id) {
        case ObjectiveId::F2: return "f2";
        case ObjectiveId::F4: return "f4";
        case ObjectiveId::F5: return "f5";
        case ObjectiveId::FMG: return "fmg";
    }
    return "fmg";
}

Eigen::VectorXd heart_target_params() {
    Eigen::VectorXd t = Eigen::VectorXd::Zero(40);
    t[0] = 2.5; // A
    t[1] = 2.5;
    t[2] = 3.0; // width
    t[3] = 2.0; // height
    // top side (CD): notch in the middle
    const double notch[9] = {0.0, 0.0, 0.02, -0.06, -0.10, -0.06, 0.02, 0.0, 0.0};
    for (int k = 0; k < 9; ++k) t[22 + k] = notch[k];
    // bottom side (AB): slight outward bulge
    const double bulge[9] = {0.0, 0.02, 0.04, 0.05, 0.06, 0.05, 0.04, 0.02, 0.0};
    for (int k = 0; k < 9; ++k) t[4 + k] = bulge[k];
    return t;
}

Objective make_objective(ProblemId problem) {
    Objective obj;
    obj.problem = problem;
    switch (problem) {
        case ProblemId::OverCircle:
            obj.id = ObjectiveId::F2;
            break;
        case ProblemId::Rectangle: {
            obj.id = ObjectiveId::F4;
            obj.f4_mapping = default_mapping(ProblemId::Rectangle, Mapping::Contour);
            DesignVector target{ProblemId::Rectangle, heart_target_params()};
            obj.f4_target_phi = shape_representation(target, obj.f4_mapping);
            break;
        }
        case ProblemId::Catenoid:
            obj.id = ObjectiveId::F5;
            break;
        case ProblemId::Griewank:
            obj.id = ObjectiveId::FMG;
            break;
        default:
            throw std::invalid_argument("no analytic objective for " + problem_info(problem).name);
    }
    return obj;
}

double surface_of_revolution(const Polyline& curve, int panels) {
    if (curve.closed || curve.pts.size() < 2)
        throw std::invalid_argument("surface_of_revolution: need an open curve");
    const double s0 = curve.pts.front().x;
    const double s1 = curve.pts.back().x;
    const double h = (s1 - s0) / panels;
    double acc = 0.0;
    double y_prev = interp_open(curve.pts, s0);
    for (int i = 1; i <= panels; ++i) {
        const double s = s0 + h * i;
        const double y = interp_open(curve.pts, s);
        const double slope = (y - y_prev) / h;
        acc += 0.5 * (y + y_prev) * std::sqrt(1.0 + slope * slope) * h;
        y_prev = y;
    }
    return 2.0 * kPi * acc;
}

double eval_objective(const Objective& obj, const DesignVector& x) {
    validate_design(x);
    switch (obj.id) {
        case ObjectiveId::F2: {
            if (x.problem != ProblemId::OverCircle)
                throw std::invalid_argument("f2 expects the over-parameterized circle");
            const CircleParams c = circle_params(x);
            return c.r - kPi * c.r * c.r - std::hypot(c.cx - 3.0, c.cy - 2.0);
        }
        case ObjectiveId::F4: {
            if (x.problem != ProblemId::Rectangle)
                throw std::invalid_argument("f4 expects the rectangle family");
            DesignVector centered = x;
            centered.values[0] = 2.5; // translate A to (2.5, 2.5)
            centered.values[1] = 2.5;
            const Eigen::VectorXd phi = shape_representation(centered, obj.f4_mapping);
            return (phi - obj.f4_target_phi).squaredNorm();
        }
        case ObjectiveId::F5: {
            if (x.problem != ProblemId::Catenoid)
                throw std::invalid_argument("f5 expects the catenoid family");
            const ContourShape shape = generate_shape(x);
            return surface_of_revolution(shape.parts.front(), obj.f5_panels);
        }
        case ObjectiveId::FMG: {
            if (x.problem != ProblemId::Griewank)
                throw std::invalid_argument("fmg expects the griewank40 family");
            const Eigen::VectorXd& v = x.values;
            if ((v.array().abs() > 600.0 + 1e-9).any())
                throw std::invalid_argument("fmg: outside [-600, 600]^d");
            double sph = 0.0;
            const Eigen::VectorXd& c = sphere_center();
            for (int j = 2; j < 10; ++j) {
                const double d = v[j] - c[j - 2];
                sph += d * d;
            }
            return griewank2(v[0], v[1]) + sph / 400000.0;
        }
    }
    throw std::logic_error("eval_objective: unknown objective");
}

double naca_lift_proxy(const DesignVector& x) {
    if (x.problem != ProblemId::Naca3 && x.problem != ProblemId::Naca22)
        throw std::invalid_argument("naca_lift_proxy expects a NACA family");
    const ContourShape shape = generate_shape(x);
    const std::vector<Vec2>& pts = shape.parts.front().pts;

    // split the closed contour at the trailing edge (max x); the first block
    // is the upper surface, the rest the lower one
    std::size_t i_te = 0;
    for (std::size_t i = 1; i < pts.size(); ++i)
        if (pts[i].x > pts[i_te].x) i_te = i;
    std::vector<Vec2> upper(pts.begin(), pts.begin() + static_cast<std::ptrdiff_t>(i_te) + 1);
    std::vector<Vec2> lower(pts.begin() + static_cast<std::ptrdiff_t>(i_te), pts.end());
    lower.push_back(pts.front());
    std::reverse(lower.begin(), lower.end()); // leading edge -> trailing edge

    // Glauert integral of the camber slope with cosine spacing
    const int k = 64;
    double acc = 0.0;
    double prev_camber = 0.5 * (interp_open(upper, 0.0) + interp_open(lower, 0.0));
    double prev_xi = 0.0;
    for (int i = 1; i <= k; ++i) {
        const double theta = kPi * i / k;
        const double xi = 0.5 * (1.0 - std::cos(theta));
        const double camber = 0.5 * (interp_open(upper, xi) + interp_open(lower, xi));
        const double slope = (camber - prev_camber) / std::max(xi - prev_xi, 1e-12);
        const double theta_mid = kPi * (i - 0.5) / k;
        acc += slope * (1.0 - std::cos(theta_mid)) * (kPi / k);
        prev_camber = camber;
        prev_xi = xi;
    }
    return -2.0 * acc; // positive for positive camber
}

} // namespace shapebo
