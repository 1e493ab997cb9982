#if defined(SHAPEBO_HAVE_AVX2)

#include "shapebo/simd.hpp"

#include <immintrin.h>
#include <limits>

namespace shapebo::simd::avx2 {

void min_sqdist_to_segments(const double* px, const double* py, std::size_t npts,
                            const double* ax, const double* ay,
                            const double* bx, const double* by, std::size_t nseg,
                            double* out) {
    const std::size_t main = npts - npts % 4;
    const __m256d zero = _mm256_setzero_pd();
    const __m256d one = _mm256_set1_pd(1.0);
    for (std::size_t i = 0; i < main; i += 4) {
        const __m256d x = _mm256_loadu_pd(px + i);
        const __m256d y = _mm256_loadu_pd(py + i);
        __m256d best = _mm256_set1_pd(std::numeric_limits<double>::infinity());
        for (std::size_t s = 0; s < nseg; ++s) {
            const __m256d xa = _mm256_set1_pd(ax[s]);
            const __m256d ya = _mm256_set1_pd(ay[s]);
            const double exs = bx[s] - ax[s];
            const double eys = by[s] - ay[s];
            const double ee = exs * exs + eys * eys;
            const __m256d ex = _mm256_set1_pd(exs);
            const __m256d ey = _mm256_set1_pd(eys);
            const __m256d inv_ee = _mm256_set1_pd(ee > 0.0 ? 1.0 / ee : 0.0);
            const __m256d dx = _mm256_sub_pd(x, xa);
            const __m256d dy = _mm256_sub_pd(y, ya);
            __m256d t = _mm256_mul_pd(_mm256_fmadd_pd(dx, ex, _mm256_mul_pd(dy, ey)), inv_ee);
            t = _mm256_min_pd(_mm256_max_pd(t, zero), one);
            const __m256d rx = _mm256_fnmadd_pd(t, ex, dx);
            const __m256d ry = _mm256_fnmadd_pd(t, ey, dy);
            const __m256d d2 = _mm256_fmadd_pd(rx, rx, _mm256_mul_pd(ry, ry));
            best = _mm256_min_pd(best, d2);
        }
        _mm256_storeu_pd(out + i, best);
    }
    if (main < npts)
        scalar::min_sqdist_to_segments(px + main, py + main, npts - main,
                                       ax, ay, bx, by, nseg, out + main);
}

void evenodd_parity(const double* px, const double* py, std::size_t npts,
                    const double* ax, const double* ay,
                    const double* bx, const double* by, std::size_t nseg,
                    std::uint8_t* parity) {
    const std::size_t main = npts - npts % 4;
    for (std::size_t i = 0; i < main; i += 4) {
        const __m256d x = _mm256_loadu_pd(px + i);
        const __m256d y = _mm256_loadu_pd(py + i);
        __m256i flips = _mm256_setzero_si256();
        for (std::size_t s = 0; s < nseg; ++s) {
            const __m256d ya = _mm256_set1_pd(ay[s]);
            const __m256d yb = _mm256_set1_pd(by[s]);
            // straddle test: (ya > y) != (yb > y)
            const __m256d above_a = _mm256_cmp_pd(ya, y, _CMP_GT_OQ);
            const __m256d above_b = _mm256_cmp_pd(yb, y, _CMP_GT_OQ);
            const __m256d straddle = _mm256_xor_pd(above_a, above_b);
            if (_mm256_movemask_pd(straddle) == 0) continue;
            const __m256d xa = _mm256_set1_pd(ax[s]);
            const __m256d slope = _mm256_set1_pd((bx[s] - ax[s]) / (by[s] - ay[s]));
            const __m256d xint = _mm256_fmadd_pd(_mm256_sub_pd(y, ya), slope, xa);
            const __m256d left = _mm256_cmp_pd(x, xint, _CMP_LT_OQ);
            const __m256d flip = _mm256_and_pd(straddle, left);
            flips = _mm256_xor_si256(flips, _mm256_castpd_si256(flip));
        }
        alignas(32) std::uint64_t lanes[4];
        _mm256_store_si256(reinterpret_cast<__m256i*>(lanes), flips);
        for (int k = 0; k < 4; ++k) parity[i + k] ^= static_cast<std::uint8_t>(lanes[k] & 1u);
    }
    if (main < npts)
        scalar::evenodd_parity(px + main, py + main, npts - main,
                               ax, ay, bx, by, nseg, parity + main);
}

void add_scaled_sqdiff(double* acc, const double* col, std::size_t n,
                       double q, double inv_theta) {
    const __m256d qv = _mm256_set1_pd(q);
    const __m256d it = _mm256_set1_pd(inv_theta);
    const std::size_t main = n - n % 4;
    for (std::size_t i = 0; i < main; i += 4) {
        const __m256d c = _mm256_loadu_pd(col + i);
        const __m256d d = _mm256_mul_pd(_mm256_sub_pd(c, qv), it);
        const __m256d a = _mm256_loadu_pd(acc + i);
        _mm256_storeu_pd(acc + i, _mm256_fmadd_pd(d, d, a));
    }
    if (main < n) scalar::add_scaled_sqdiff(acc + main, col + main, n - main, q, inv_theta);
}

} // namespace shapebo::simd::avx2

#endif // SHAPEBO_HAVE_AVX2
