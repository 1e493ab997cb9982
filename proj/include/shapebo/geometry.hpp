#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

namespace shapebo {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;
};

inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
inline Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double norm(Vec2 a) { return std::sqrt(dot(a, a)); }

/// One polyline loop or open chain. `closed` means the last vertex connects
/// back to the first (the closing segment is implicit, not duplicated).
struct Polyline {
    std::vector<Vec2> pts;
    bool closed = false;

    [[nodiscard]] std::size_t segment_count() const {
        if (pts.size() < 2) return 0;
        return closed ? pts.size() : pts.size() - 1;
    }
    [[nodiscard]] double length() const {
        double acc = 0.0;
        for (std::size_t s = 0; s < segment_count(); ++s) {
            const Vec2& a = pts[s];
            const Vec2& b = pts[(s + 1) % pts.size()];
            acc += norm(b - a);
        }
        return acc;
    }
};

/// A shape contour, possibly made of several disjoint loops (Example with
/// three circles). All parts share the open/closed property.
struct ContourShape {
    std::vector<Polyline> parts;
    bool closed = false;

    [[nodiscard]] std::size_t total_vertices() const {
        std::size_t n = 0;
        for (const auto& p : parts) n += p.pts.size();
        return n;
    }
    void validate() const {
        if (parts.empty()) throw std::invalid_argument("ContourShape: no parts");
        for (const auto& p : parts) {
            if (closed && p.pts.size() < 3)
                throw std::invalid_argument("ContourShape: closed part needs >= 3 points");
            if (!closed && p.pts.size() < 2)
                throw std::invalid_argument("ContourShape: open part needs >= 2 points");
            for (const auto& q : p.pts)
                if (!std::isfinite(q.x) || !std::isfinite(q.y))
                    throw std::invalid_argument("ContourShape: non-finite coordinate");
        }
    }
};

/// Resample a polyline at `n` arclength-equispaced locations starting at the
/// first vertex. Closed polylines are sampled over [0, L) so point 0 appears
/// once; open polylines include both endpoints.
std::vector<Vec2> resample_arclength(const Polyline& line, int n);

} // namespace shapebo
