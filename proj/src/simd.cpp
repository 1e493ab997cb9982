#include "shapebo/simd.hpp"

#include <algorithm>
#include <cstdlib>
#include <cstring>
#include <limits>

namespace shapebo::simd {

namespace scalar {

void min_sqdist_to_segments(const double* px, const double* py, std::size_t npts,
                            const double* ax, const double* ay,
                            const double* bx, const double* by, std::size_t nseg,
                            double* out) {
    for (std::size_t i = 0; i < npts; ++i) out[i] = std::numeric_limits<double>::infinity();
    for (std::size_t s = 0; s < nseg; ++s) {
        const double ex = bx[s] - ax[s];
        const double ey = by[s] - ay[s];
        const double ee = ex * ex + ey * ey;
        const double inv_ee = ee > 0.0 ? 1.0 / ee : 0.0;
        for (std::size_t i = 0; i < npts; ++i) {
            const double dx = px[i] - ax[s];
            const double dy = py[i] - ay[s];
            double t = (dx * ex + dy * ey) * inv_ee;
            t = std::clamp(t, 0.0, 1.0);
            const double rx = dx - t * ex;
            const double ry = dy - t * ey;
            const double d2 = rx * rx + ry * ry;
            if (d2 < out[i]) out[i] = d2;
        }
    }
}

void evenodd_parity(const double* px, const double* py, std::size_t npts,
                    const double* ax, const double* ay,
                    const double* bx, const double* by, std::size_t nseg,
                    std::uint8_t* parity) {
    for (std::size_t s = 0; s < nseg; ++s) {
        const double ya = ay[s];
        const double yb = by[s];
        const double xa = ax[s];
        const double xb = bx[s];
        for (std::size_t i = 0; i < npts; ++i) {
            const bool above_a = ya > py[i];
            const bool above_b = yb > py[i];
            if (above_a != above_b) {
                const double xint = xa + (py[i] - ya) * (xb - xa) / (yb - ya);
                if (px[i] < xint) parity[i] ^= 1;
            }
        }
    }
}

void add_scaled_sqdiff(double* acc, const double* col, std::size_t n,
                       double q, double inv_theta) {
    for (std::size_t i = 0; i < n; ++i) {
        const double d = (col[i] - q) * inv_theta;
        acc[i] += d * d;
    }
}

} // namespace scalar

bool avx2_compiled() {
#if defined(SHAPEBO_HAVE_AVX2)
    return true;
#else
    return false;
#endif
}

bool avx2_supported() {
#if defined(SHAPEBO_HAVE_AVX2)
    return __builtin_cpu_supports("avx2") != 0;
#else
    return false;
#endif
}

namespace {

Backend pick_backend() {
    if (const char* env = std::getenv("SHAPEBO_SIMD")) {
        if (std::strcmp(env, "scalar") == 0) return Backend::Scalar;
        if (std::strcmp(env, "avx2") == 0 && avx2_supported()) return Backend::Avx2;
    }
    return avx2_supported() ? Backend::Avx2 : Backend::Scalar;
}

const Backend g_backend = pick_backend();

} // namespace

Backend active_backend() { return g_backend; }

const char* backend_name() {
    return g_backend == Backend::Avx2 ? "avx2" : "scalar";
}

void min_sqdist_to_segments(const double* px, const double* py, std::size_t npts,
                            const double* ax, const double* ay,
                            const double* bx, const double* by, std::size_t nseg,
                            double* out) {
#if defined(SHAPEBO_HAVE_AVX2)
    if (g_backend == Backend::Avx2)
        return avx2::min_sqdist_to_segments(px, py, npts, ax, ay, bx, by, nseg, out);
#endif
    scalar::min_sqdist_to_segments(px, py, npts, ax, ay, bx, by, nseg, out);
}

void evenodd_parity(const double* px, const double* py, std::size_t npts,
                    const double* ax, const double* ay,
                    const double* bx, const double* by, std::size_t nseg,
                    std::uint8_t* parity) {
#if defined(SHAPEBO_HAVE_AVX2)
    if (g_backend == Backend::Avx2)
        return avx2::evenodd_parity(px, py, npts, ax, ay, bx, by, nseg, parity);
#endif
    scalar::evenodd_parity(px, py, npts, ax, ay, bx, by, nseg, parity);
}

void add_scaled_sqdiff(double* acc, const double* col, std::size_t n,
                       double q, double inv_theta) {
#if defined(SHAPEBO_HAVE_AVX2)
    if (g_backend == Backend::Avx2)
        return avx2::add_scaled_sqdiff(acc, col, n, q, inv_theta);
#endif
    scalar::add_scaled_sqdiff(acc, col, n, q, inv_theta);
}

} // namespace shapebo::simd
