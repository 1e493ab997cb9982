#include "shapebo/geometry.hpp"

#include <stdexcept>

namespace shapebo {

std::vector<Vec2> resample_arclength(const Polyline& line, int n) {
    if (n < 2) throw std::invalid_argument("resample_arclength: need n >= 2");
    const std::size_t nseg = line.segment_count();
    if (nseg == 0) throw std::invalid_argument("resample_arclength: degenerate polyline");

    std::vector<double> cum(nseg + 1, 0.0);
    for (std::size_t s = 0; s < nseg; ++s) {
        const Vec2& a = line.pts[s];
        const Vec2& b = line.pts[(s + 1) % line.pts.size()];
        cum[s + 1] = cum[s] + norm(b - a);
    }
    const double total = cum.back();
    if (total <= 0.0) throw std::invalid_argument("resample_arclength: zero-length contour");

    std::vector<Vec2> out(static_cast<std::size_t>(n));
    std::size_t seg = 0;
    for (int j = 0; j < n; ++j) {
        // closed: n samples over [0, L); open: n samples over [0, L]
        const double target = line.closed ? total * j / n : total * j / (n - 1);
        while (seg + 1 < nseg && cum[seg + 1] < target) ++seg;
        const double seg_len = cum[seg + 1] - cum[seg];
        const double t = seg_len > 0.0 ? (target - cum[seg]) / seg_len : 0.0;
        const Vec2& a = line.pts[seg];
        const Vec2& b = line.pts[(seg + 1) % line.pts.size()];
        out[static_cast<std::size_t>(j)] = a + t * (b - a);
    }
    return out;
}

} // namespace shapebo
