#include "shapebo/shapes.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <thread>

#include "shapebo/simd.hpp"

namespace shapebo {

namespace {

constexpr double kPi = std::numbers::pi;

GridSpec grid_for_bbox(double xlo, double xhi, double ylo, double yhi) {
    // 10% margin on the feasible bounding box (5% of the span on each side)
    const double mx = 0.05 * (xhi - xlo);
    const double my = 0.05 * (yhi - ylo);
    return GridSpec{64, 64, xlo - mx, xhi + mx, ylo - my, yhi + my};
}

std::vector<Bounds> uniform_bounds(int n, double lo, double hi) {
    return std::vector<Bounds>(static_cast<std::size_t>(n), Bounds{lo, hi});
}

ProblemInfo base_info(ProblemId id, const char* name, int dim, std::vector<Bounds> bounds = {}) {
    ProblemInfo p;
    p.id = id;
    p.name = name;
    p.dim = dim;
    p.bounds = std::move(bounds);
    return p;
}

std::vector<ProblemInfo> make_problem_table() {
    std::vector<ProblemInfo> t;

    {
        ProblemInfo p = base_info(ProblemId::Circle1, "circle1d", 1, {{0.5, 3.0}});
        p.default_grid = grid_for_bbox(-3, 3, -3, 3);
        t.push_back(p);
    }
    {
        ProblemInfo p = base_info(ProblemId::Circle2, "circle2d", 2, {{-2, 2}, {0.5, 3.0}});
        p.default_grid = grid_for_bbox(-5, 5, -3, 3);
        t.push_back(p);
    }
    {
        ProblemInfo p =
            base_info(ProblemId::Circle3, "circle3d", 3, {{-2, 2}, {-2, 2}, {0.5, 3.0}});
        p.default_grid = grid_for_bbox(-5, 5, -5, 5);
        t.push_back(p);
    }
    {
        // center (s,t) and radius r are sums over the three 13-parameter
        // blocks; the block leaders x1, x14, x27 dominate in magnitude but
        // the remaining coordinates still move the circle noticeably
        ProblemInfo p = base_info(ProblemId::OverCircle, "circle39", 39);
        p.bounds.resize(39);
        p.bounds[0] = {0.0, 6.0};
        for (int j = 1; j < 13; ++j) p.bounds[j] = {-0.5, 0.5};
        p.bounds[13] = {-1.0, 5.0};
        for (int j = 14; j < 26; ++j) p.bounds[j] = {-0.5, 0.5};
        p.bounds[26] = {0.3, 3.0};
        for (int j = 27; j < 39; ++j) p.bounds[j] = {-0.02, 0.02};
        p.default_grid = grid_for_bbox(-9.5, 15.5, -10.5, 14.5);
        t.push_back(p);
    }
    {
        ProblemInfo p = base_info(ProblemId::ThreeCircles, "threecircles", 9);
        p.bounds = {{-5, -3}, {-1, 1}, {0.3, 0.9},
                    {-1, 1},  {-1, 1}, {0.3, 0.9},
                    {3, 5},   {-1, 1}, {0.3, 0.9}};
        p.contour_parts = 3;
        p.default_contour_points = 198; // divisible by 3
        p.default_grid = grid_for_bbox(-6, 6, -2, 2);
        t.push_back(p);
    }
    {
        ProblemInfo p = base_info(ProblemId::Rectangle, "rectangle", 40);
        p.bounds.resize(40);
        p.bounds[0] = {0.0, 5.0};
        p.bounds[1] = {0.0, 5.0};
        p.bounds[2] = {2.0, 4.0}; // width
        p.bounds[3] = {1.0, 3.0}; // height
        for (int j = 4; j < 40; ++j) p.bounds[j] = {-0.1, 0.1};
        p.default_grid = grid_for_bbox(-0.2, 9.2, -0.2, 8.2);
        t.push_back(p);
    }
    {
        ProblemInfo p = base_info(ProblemId::Catenoid, "catenoid", 29, uniform_bounds(29, -0.5, 0.5));
        p.closed = false;
        p.default_contour_points = 100;
        t.push_back(p);
    }
    {
        ProblemInfo p = base_info(ProblemId::Naca3, "naca3", 3,
                                  {{0.0, 0.09}, {0.25, 0.65}, {0.06, 0.18}});
        p.default_grid = grid_for_bbox(-0.05, 1.05, -0.15, 0.22);
        t.push_back(p);
    }
    {
        ProblemInfo p = base_info(ProblemId::Naca22, "naca22", 22);
        p.bounds = {{0.0, 0.09}, {0.25, 0.65}, {0.06, 0.18}};
        for (int j = 0; j < 19; ++j) p.bounds.push_back({-0.004, 0.004});
        p.default_grid = grid_for_bbox(-0.05, 1.05, -0.15, 0.22);
        t.push_back(p);
    }
    {
        ProblemInfo p = base_info(ProblemId::Griewank, "griewank40", 40, uniform_bounds(40, -600, 600));
        p.has_shape = false;
        t.push_back(p);
    }
    return t;
}

const std::vector<ProblemInfo>& problem_table() {
    static const std::vector<ProblemInfo> table = make_problem_table();
    return table;
}

// ---- circle geometry -------------------------------------------------------

Polyline circle_polyline(const CircleParams& c, int vertices) {
    Polyline p;
    p.closed = true;
    p.pts.resize(static_cast<std::size_t>(vertices));
    for (int k = 0; k < vertices; ++k) {
        const double a = 2.0 * kPi * k / vertices;
        p.pts[static_cast<std::size_t>(k)] = {c.cx + c.r * std::cos(a), c.cy + c.r * std::sin(a)};
    }
    return p;
}

// Exact node placement: anchor at the rightmost point, counterclockwise.
void circle_nodes(const CircleParams& c, int n, double* out_xy) {
    for (int k = 0; k < n; ++k) {
        const double a = 2.0 * kPi * k / n;
        out_xy[2 * k] = c.cx + c.r * std::cos(a);
        out_xy[2 * k + 1] = c.cy + c.r * std::sin(a);
    }
}

// ---- rectangle (Example 4) -------------------------------------------------

struct RectSides {
    Vec2 corner[4];  // A, B, C, D
    Vec2 dir[4];     // unit traversal direction of AB, BC, CD, DA
    double len[4];
    Vec2 outward[4]; // outward normals
};

RectSides rect_sides(const Eigen::VectorXd& x) {
    const double w = x[2], h = x[3];
    if (w <= 0.0 || h <= 0.0)
        throw std::invalid_argument("rectangle: nonpositive width or height");
    RectSides r;
    r.corner[0] = {x[0], x[1]};
    r.corner[1] = {x[0] + w, x[1]};
    r.corner[2] = {x[0] + w, x[1] + h};
    r.corner[3] = {x[0], x[1] + h};
    r.dir[0] = {1, 0};
    r.dir[1] = {0, 1};
    r.dir[2] = {-1, 0};
    r.dir[3] = {0, -1};
    r.len[0] = r.len[2] = w;
    r.len[1] = r.len[3] = h;
    r.outward[0] = {0, -1};
    r.outward[1] = {1, 0};
    r.outward[2] = {0, 1};
    r.outward[3] = {-1, 0};
    return r;
}

// Piecewise-linear interpolation of the 9 station offsets (zero at both
// corners, stations at fractions 1/10..9/10 of the side).
double hat_offset(const Eigen::VectorXd& x, int side, double u) {
    const int base = 4 + 9 * side;
    const double pos = u * 10.0;
    const int k = static_cast<int>(std::floor(pos));
    const double t = pos - k;
    const double left = (k >= 1 && k <= 9) ? x[base + k - 1] : 0.0;
    const double right = (k + 1 >= 1 && k + 1 <= 9) ? x[base + k] : 0.0;
    return (1.0 - t) * left + t * right;
}

// Node positions are affine in all 40 parameters: stations are placed at
// fixed fractions of each (axis-aligned) side.
void rectangle_nodes(const Eigen::VectorXd& x, int n, double* out_xy) {
    if (n % 4 != 0) throw std::invalid_argument("rectangle: num_points must be divisible by 4");
    const RectSides r = rect_sides(x);
    const int per_side = n / 4;
    int idx = 0;
    for (int side = 0; side < 4; ++side) {
        for (int j = 0; j < per_side; ++j) {
            const double u = static_cast<double>(j) / per_side;
            const Vec2 base = r.corner[side] + (u * r.len[side]) * r.dir[side];
            const Vec2 p = base + hat_offset(x, side, u) * r.outward[side];
            out_xy[2 * idx] = p.x;
            out_xy[2 * idx + 1] = p.y;
            ++idx;
        }
    }
}

Polyline rectangle_polyline(const Eigen::VectorXd& x) {
    const RectSides r = rect_sides(x);
    Polyline p;
    p.closed = true;
    for (int side = 0; side < 4; ++side) {
        p.pts.push_back(r.corner[side]);
        for (int k = 1; k <= 9; ++k) {
            const double u = k / 10.0;
            const Vec2 base = r.corner[side] + (u * r.len[side]) * r.dir[side];
            p.pts.push_back(base + x[4 + 9 * side + k - 1] * r.outward[side]);
        }
    }
    return p;
}

// ---- catenoid curve (Example 5) --------------------------------------------

Polyline catenoid_polyline(const Eigen::VectorXd& r) {
    const CatenoidConfig& cfg = catenoid_config();
    Polyline p;
    p.closed = false;
    p.pts.resize(31);
    for (int k = 0; k <= 30; ++k) {
        const double s = k / 30.0;
        const double line = cfg.ya + (cfg.yb - cfg.ya) * s;
        const double dev = (k >= 1 && k <= 29) ? r[k - 1] : 0.0;
        p.pts[static_cast<std::size_t>(k)] = {s, line + dev};
    }
    return p;
}

// Nodes at fixed chord stations (the landmark convention of this family):
// the ordinate is linear in the perturbations, so the representation is
// affine in the 29 parameters.
void catenoid_nodes(const Eigen::VectorXd& r, int n, double* out_xy) {
    const Polyline curve = catenoid_polyline(r);
    for (int i = 0; i < n; ++i) {
        const double s = static_cast<double>(i) / (n - 1);
        const double pos = s * 30.0;
        const int k = std::min(static_cast<int>(std::floor(pos)), 29);
        const double t = pos - k;
        const double y = (1.0 - t) * curve.pts[static_cast<std::size_t>(k)].y +
                         t * curve.pts[static_cast<std::size_t>(k) + 1].y;
        out_xy[2 * i] = s;
        out_xy[2 * i + 1] = y;
    }
}

// ---- NACA airfoils (Examples 6 and 7) --------------------------------------

double naca_thickness(double t, double xc) {
    return 5.0 * t *
           (0.2969 * std::sqrt(xc) - 0.1260 * xc - 0.3516 * xc * xc + 0.2843 * xc * xc * xc -
            0.1036 * xc * xc * xc * xc); // -0.1036 closes the trailing edge
}

void naca_camber(double m, double p, double xc, double& yc, double& dyc) {
    if (m == 0.0) {
        yc = 0.0;
        dyc = 0.0;
        return;
    }
    if (xc < p) {
        yc = m / (p * p) * (2.0 * p * xc - xc * xc);
        dyc = 2.0 * m / (p * p) * (p - xc);
    } else {
        const double q = 1.0 - p;
        yc = m / (q * q) * ((1.0 - 2.0 * p) + 2.0 * p * xc - xc * xc);
        dyc = 2.0 * m / (q * q) * (p - xc);
    }
}

// cos^2 local bump of half-width `w` in chord coordinate
double bump_shape(double xc, double center, double w) {
    const double u = (xc - center) / w;
    if (u <= -1.0 || u >= 1.0) return 0.0;
    const double c = std::cos(0.5 * kPi * u);
    return c * c;
}

Polyline naca_polyline(const Eigen::VectorXd& x, int m_half = 160) {
    const double m = x[0], p = x[1], t = x[2];
    if (t <= 0.0) throw std::invalid_argument("naca: nonpositive thickness");
    const bool bumps = x.size() == 22;
    constexpr double kBumpWidth = 0.12;

    // traversal: leading edge -> upper surface -> trailing edge -> lower -> back
    std::vector<Vec2> pts;
    std::vector<int> surface; // +1 upper, -1 lower
    std::vector<double> chord;
    pts.reserve(static_cast<std::size_t>(2 * m_half));
    for (int j = 0; j <= m_half; ++j) {
        const double xc = 0.5 * (1.0 - std::cos(kPi * j / m_half));
        double yc, dyc;
        naca_camber(m, p, xc, yc, dyc);
        const double yt = naca_thickness(t, xc);
        const double th = std::atan(dyc);
        pts.push_back({xc - yt * std::sin(th), yc + yt * std::cos(th)});
        surface.push_back(+1);
        chord.push_back(xc);
    }
    for (int j = m_half - 1; j >= 1; --j) {
        const double xc = 0.5 * (1.0 - std::cos(kPi * j / m_half));
        double yc, dyc;
        naca_camber(m, p, xc, yc, dyc);
        const double yt = naca_thickness(t, xc);
        const double th = std::atan(dyc);
        pts.push_back({xc + yt * std::sin(th), yc - yt * std::cos(th)});
        surface.push_back(-1);
        chord.push_back(xc);
    }

    if (bumps) {
        // bumps 1..10 on the upper surface, 11..19 on the lower, displaced
        // along the local outward normal
        const std::size_t nv = pts.size();
        std::vector<Vec2> displaced = pts;
        for (std::size_t k = 0; k < nv; ++k) {
            const Vec2& prev = pts[(k + nv - 1) % nv];
            const Vec2& next = pts[(k + 1) % nv];
            Vec2 tan = next - prev;
            const double tn = norm(tan);
            if (tn == 0.0) continue;
            const Vec2 outward{-tan.y / tn, tan.x / tn}; // left normal of the clockwise traversal
            double disp = 0.0;
            if (surface[k] > 0) {
                for (int i = 1; i <= 10; ++i)
                    disp += x[2 + i] * bump_shape(chord[k], i / 11.0, kBumpWidth);
            } else {
                for (int i = 1; i <= 9; ++i)
                    disp += x[12 + i] * bump_shape(chord[k], i / 10.0, kBumpWidth);
            }
            displaced[k] = pts[k] + disp * outward;
        }
        pts.swap(displaced);
    }

    Polyline out;
    out.closed = true;
    out.pts = std::move(pts);
    return out;
}

// ---- shared mapping helpers --------------------------------------------------

struct SegmentSoup {
    std::vector<double> ax, ay, bx, by;
    std::vector<std::size_t> part_end; // prefix ends, one per part
};

SegmentSoup collect_segments(const ContourShape& shape) {
    SegmentSoup s;
    for (const auto& part : shape.parts) {
        const std::size_t nseg = part.segment_count();
        for (std::size_t k = 0; k < nseg; ++k) {
            const Vec2& a = part.pts[k];
            const Vec2& b = part.pts[(k + 1) % part.pts.size()];
            s.ax.push_back(a.x);
            s.ay.push_back(a.y);
            s.bx.push_back(b.x);
            s.by.push_back(b.y);
        }
        s.part_end.push_back(s.ax.size());
    }
    return s;
}

void grid_points(const GridSpec& grid, std::vector<double>& px, std::vector<double>& py) {
    const int n = grid.size();
    px.resize(static_cast<std::size_t>(n));
    py.resize(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) {
        const Vec2 p = grid.point(j);
        px[static_cast<std::size_t>(j)] = p.x;
        py[static_cast<std::size_t>(j)] = p.y;
    }
}

} // namespace

const ProblemInfo& problem_info(ProblemId id) {
    for (const auto& p : problem_table())
        if (p.id == id) return p;
    throw std::logic_error("unknown problem id");
}

const std::vector<ProblemId>& all_problems() {
    static const std::vector<ProblemId> ids = [] {
        std::vector<ProblemId> v;
        for (const auto& p : problem_table()) v.push_back(p.id);
        return v;
    }();
    return ids;
}

ProblemId problem_from_name(const std::string& name) {
    for (const auto& p : problem_table())
        if (p.name == name) return p.id;
    throw std::invalid_argument("unknown problem '" + name + "'");
}

void validate_design(const DesignVector& x) {
    const ProblemInfo& info = problem_info(x.problem);
    if (x.values.size() != info.dim)
        throw std::invalid_argument("design for " + info.name + " must have dimension " +
                                    std::to_string(info.dim) + ", got " +
                                    std::to_string(x.values.size()));
    for (int j = 0; j < info.dim; ++j) {
        const double v = x.values[j];
        if (!std::isfinite(v))
            throw std::invalid_argument("design coordinate " + std::to_string(j) + " not finite");
        const Bounds& b = info.bounds[static_cast<std::size_t>(j)];
        const double slack = 1e-9 * (b.hi - b.lo);
        if (v < b.lo - slack || v > b.hi + slack)
            throw std::invalid_argument("design coordinate " + std::to_string(j) +
                                        " out of bounds for " + info.name);
    }
}

CircleParams circle_params(const DesignVector& x, int which) {
    switch (x.problem) {
        case ProblemId::Circle1:
            return {0.0, 0.0, x.values[0]};
        case ProblemId::Circle2:
            return {x.values[0], 0.0, x.values[1]};
        case ProblemId::Circle3:
            return {x.values[0], x.values[1], x.values[2]};
        case ProblemId::OverCircle: {
            CircleParams c;
            c.cx = x.values.segment(0, 13).sum();
            c.cy = x.values.segment(13, 13).sum();
            c.r = x.values.segment(26, 13).sum();
            return c;
        }
        case ProblemId::ThreeCircles:
            return {x.values[3 * which], x.values[3 * which + 1], x.values[3 * which + 2]};
        default:
            throw std::invalid_argument("circle_params: not a circle family");
    }
}

ContourShape generate_shape(const DesignVector& x) {
    validate_design(x);
    const ProblemInfo& info = problem_info(x.problem);
    if (!info.has_shape) throw std::invalid_argument(info.name + " has no shape");

    ContourShape shape;
    shape.closed = info.closed;
    switch (x.problem) {
        case ProblemId::Circle1:
        case ProblemId::Circle2:
        case ProblemId::Circle3:
        case ProblemId::OverCircle: {
            const CircleParams c = circle_params(x);
            if (c.r <= 0.0) throw std::invalid_argument("circle: nonpositive radius");
            shape.parts.push_back(circle_polyline(c, 512));
            break;
        }
        case ProblemId::ThreeCircles:
            for (int i = 0; i < 3; ++i) {
                const CircleParams c = circle_params(x, i);
                if (c.r <= 0.0) throw std::invalid_argument("circle: nonpositive radius");
                shape.parts.push_back(circle_polyline(c, 512));
            }
            break;
        case ProblemId::Rectangle:
            shape.parts.push_back(rectangle_polyline(x.values));
            break;
        case ProblemId::Catenoid:
            shape.parts.push_back(catenoid_polyline(x.values));
            break;
        case ProblemId::Naca3:
        case ProblemId::Naca22:
            shape.parts.push_back(naca_polyline(x.values));
            break;
        default:
            throw std::invalid_argument("generate_shape: unsupported family");
    }
    shape.validate();
    return shape;
}

Eigen::VectorXd map_characteristic(const ContourShape& shape, const GridSpec& grid) {
    shape.validate();
    if (!shape.closed)
        throw std::invalid_argument("characteristic function undefined for open curves");
    const SegmentSoup soup = collect_segments(shape);
    std::vector<double> px, py;
    grid_points(grid, px, py);
    std::vector<std::uint8_t> parity(px.size(), 0);
    simd::evenodd_parity(px.data(), py.data(), px.size(), soup.ax.data(), soup.ay.data(),
                         soup.bx.data(), soup.by.data(), soup.ax.size(), parity.data());
    Eigen::VectorXd phi(grid.size());
    for (std::size_t j = 0; j < parity.size(); ++j) phi[static_cast<Eigen::Index>(j)] = parity[j];
    return phi;
}

Eigen::VectorXd map_signed_distance(const ContourShape& shape, const GridSpec& grid) {
    shape.validate();
    if (!shape.closed)
        throw std::invalid_argument("signed distance undefined for open curves");
    const SegmentSoup soup = collect_segments(shape);
    std::vector<double> px, py;
    grid_points(grid, px, py);
    const std::size_t n = px.size();
    std::vector<double> d2(n);
    simd::min_sqdist_to_segments(px.data(), py.data(), n, soup.ax.data(), soup.ay.data(),
                                 soup.bx.data(), soup.by.data(), soup.ax.size(), d2.data());
    std::vector<std::uint8_t> parity(n, 0);
    simd::evenodd_parity(px.data(), py.data(), n, soup.ax.data(), soup.ay.data(), soup.bx.data(),
                         soup.by.data(), soup.ax.size(), parity.data());
    Eigen::VectorXd phi(grid.size());
    for (std::size_t j = 0; j < n; ++j) {
        const double d = std::sqrt(d2[j]);
        phi[static_cast<Eigen::Index>(j)] = parity[j] ? d : -d;
    }
    return phi;
}

Eigen::VectorXd map_contour(const ContourShape& shape, int num_points) {
    shape.validate();
    if (num_points < 3) throw std::invalid_argument("map_contour: need num_points >= 3");
    const int parts = static_cast<int>(shape.parts.size());
    if (num_points % parts != 0)
        throw std::invalid_argument("map_contour: num_points must be divisible by the part count");
    const int per_part = num_points / parts;
    Eigen::VectorXd phi(2 * num_points);
    int idx = 0;
    for (const auto& part : shape.parts) {
        const std::vector<Vec2> pts = resample_arclength(part, per_part);
        for (const Vec2& p : pts) {
            phi[2 * idx] = p.x;
            phi[2 * idx + 1] = p.y;
            ++idx;
        }
    }
    return phi;
}

Eigen::VectorXd shape_representation(const DesignVector& x, const MappingSpec& spec) {
    validate_design(x);
    const ProblemInfo& info = problem_info(x.problem);
    if (!info.has_shape) throw std::invalid_argument(info.name + " has no shape representation");

    if (spec.mapping != Mapping::Contour) {
        const ContourShape shape = generate_shape(x);
        return spec.mapping == Mapping::Characteristic ? map_characteristic(shape, spec.grid)
                                                       : map_signed_distance(shape, spec.grid);
    }

    const int n = spec.num_points;
    switch (x.problem) {
        case ProblemId::Circle1:
        case ProblemId::Circle2:
        case ProblemId::Circle3:
        case ProblemId::OverCircle: {
            Eigen::VectorXd phi(2 * n);
            const CircleParams c = circle_params(x);
            if (c.r <= 0.0) throw std::invalid_argument("circle: nonpositive radius");
            circle_nodes(c, n, phi.data());
            return phi;
        }
        case ProblemId::ThreeCircles: {
            if (n % 3 != 0)
                throw std::invalid_argument("threecircles: num_points must be divisible by 3");
            Eigen::VectorXd phi(2 * n);
            for (int i = 0; i < 3; ++i) {
                const CircleParams c = circle_params(x, i);
                if (c.r <= 0.0) throw std::invalid_argument("circle: nonpositive radius");
                circle_nodes(c, n / 3, phi.data() + 2 * (n / 3) * i);
            }
            return phi;
        }
        case ProblemId::Rectangle: {
            Eigen::VectorXd phi(2 * n);
            rectangle_nodes(x.values, n, phi.data());
            return phi;
        }
        case ProblemId::Catenoid: {
            Eigen::VectorXd phi(2 * n);
            catenoid_nodes(x.values, n, phi.data());
            return phi;
        }
        case ProblemId::Naca3:
        case ProblemId::Naca22:
            return map_contour(generate_shape(x), n);
        default:
            throw std::invalid_argument("shape_representation: unsupported family");
    }
}

int representation_dim(ProblemId id, const MappingSpec& spec) {
    (void)id;
    return spec.mapping == Mapping::Contour ? 2 * spec.num_points : spec.grid.size();
}

MappingSpec default_mapping(ProblemId id, Mapping mapping) {
    const ProblemInfo& info = problem_info(id);
    MappingSpec spec;
    spec.mapping = mapping;
    spec.grid = info.default_grid;
    spec.num_points = info.default_contour_points;
    return spec;
}

Mapping mapping_from_name(const std::string& name) {
    if (name == "characteristic" || name == "chi") return Mapping::Characteristic;
    if (name == "signed-distance" || name == "sdf") return Mapping::SignedDistance;
    if (name == "contour" || name == "pdm") return Mapping::Contour;
    throw std::invalid_argument("unknown mapping '" + name + "'");
}

std::string mapping_name(Mapping m) {
    switch (m) {
        case Mapping::Characteristic: return "characteristic";
        case Mapping::SignedDistance: return "signed-distance";
        case Mapping::Contour: return "contour";
    }
    return "contour";
}

const CatenoidConfig& catenoid_config() {
    static const CatenoidConfig cfg{};
    return cfg;
}

namespace {
constexpr int kStations = 29;
}

Eigen::VectorXd sample_catenoid_perturbations(Rng& rng) {
    const CatenoidConfig& cfg = catenoid_config();
    // squared-exponential prior, length-scale |AB|/6, over the chord stations
    static const Eigen::MatrixXd chol = [] {
        const CatenoidConfig& c = catenoid_config();
        const double len = std::hypot(1.0, c.yb - c.ya) / 6.0;
        Eigen::MatrixXd k(kStations, kStations);
        for (int i = 0; i < kStations; ++i)
            for (int j = 0; j < kStations; ++j) {
                const double d = (i - j) / 30.0;
                k(i, j) = c.gp_sd * c.gp_sd * std::exp(-0.5 * d * d / (len * len));
            }
        k.diagonal().array() += 1e-10;
        return Eigen::MatrixXd(k.llt().matrixL());
    }();

    Eigen::VectorXd z(kStations);
    for (int attempt = 0; attempt < 10000; ++attempt) {
        for (int i = 0; i < kStations; ++i) z[i] = gaussian(rng);
        Eigen::VectorXd r = chol * z;
        if ((r.array().abs() <= cfg.envelope_half_width).all()) return r;
    }
    throw std::runtime_error("catenoid sampler: envelope rejection failed");
}

DesignVector sample_design(ProblemId id, Rng& rng) {
    const ProblemInfo& info = problem_info(id);
    DesignVector x;
    x.problem = id;
    if (id == ProblemId::Catenoid) {
        x.values = sample_catenoid_perturbations(rng);
        return x;
    }
    x.values.resize(info.dim);
    for (int j = 0; j < info.dim; ++j)
        x.values[j] = uniform(rng, info.bounds[static_cast<std::size_t>(j)].lo,
                              info.bounds[static_cast<std::size_t>(j)].hi);
    return x;
}

ShapeDatabase build_database(ProblemId id, int n, const MappingSpec& spec, std::uint64_t seed,
                             SamplerSpec sampler, int threads) {
    if (n < 2) throw std::invalid_argument("build_database: need N >= 2");
    const ProblemInfo& info = problem_info(id);
    if (!info.has_shape) throw std::invalid_argument(info.name + " has no shape database");
    if (sampler == SamplerSpec::GpEnvelope && id != ProblemId::Catenoid)
        throw std::invalid_argument("GP envelope sampler is only defined for the catenoid");

    ShapeDatabase db;
    db.problem = id;
    db.mapping = spec;
    db.seed = seed;
    db.designs.resize(n, info.dim);
    db.phi.resize(n, representation_dim(id, spec));

    const bool force_uniform = sampler == SamplerSpec::Uniform;
    const auto fill_row = [&](int i) {
        Rng rng = make_rng(seed, static_cast<std::uint64_t>(i));
        DesignVector x;
        if (force_uniform && id == ProblemId::Catenoid) {
            x.problem = id;
            x.values.resize(info.dim);
            for (int j = 0; j < info.dim; ++j)
                x.values[j] = uniform(rng, info.bounds[static_cast<std::size_t>(j)].lo,
                                      info.bounds[static_cast<std::size_t>(j)].hi);
        } else {
            x = sample_design(id, rng);
        }
        db.designs.row(i) = x.values.transpose();
        db.phi.row(i) = shape_representation(x, spec).transpose();
    };

    int nthreads = threads > 0 ? threads : static_cast<int>(std::thread::hardware_concurrency());
    nthreads = std::clamp(nthreads, 1, 8);
    if (nthreads == 1 || n < 64) {
        for (int i = 0; i < n; ++i) fill_row(i);
    } else {
        std::vector<std::thread> pool;
        std::atomic<int> next{0};
        for (int t = 0; t < nthreads; ++t)
            pool.emplace_back([&] {
                for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) fill_row(i);
            });
        for (auto& th : pool) th.join();
    }
    return db;
}

} // namespace shapebo
