#include <doctest.h>

#include <cmath>
#include <vector>

#include "shapebo/rng.hpp"
#include "shapebo/simd.hpp"

using namespace shapebo;

namespace {

struct Soup {
    std::vector<double> px, py, ax, ay, bx, by;
};

Soup random_soup(int npts, int nseg, std::uint64_t seed) {
    Rng rng = make_rng(seed);
    Soup s;
    for (int i = 0; i < npts; ++i) {
        s.px.push_back(uniform(rng, -3, 3));
        s.py.push_back(uniform(rng, -3, 3));
    }
    for (int i = 0; i < nseg; ++i) {
        s.ax.push_back(uniform(rng, -2, 2));
        s.ay.push_back(uniform(rng, -2, 2));
        s.bx.push_back(uniform(rng, -2, 2));
        s.by.push_back(uniform(rng, -2, 2));
    }
    return s;
}

} // namespace

TEST_CASE("scalar point-segment distance against closed forms") {
    // unit segment on the x-axis
    const double ax = 0, ay = 0, bx = 1, by = 0;
    const double px[3] = {0.5, -1.0, 2.0};
    const double py[3] = {1.0, 0.0, 1.0};
    double out[3];
    simd::scalar::min_sqdist_to_segments(px, py, 3, &ax, &ay, &bx, &by, 1, out);
    CHECK(out[0] == doctest::Approx(1.0));          // above the middle
    CHECK(out[1] == doctest::Approx(1.0));          // beyond endpoint a
    CHECK(out[2] == doctest::Approx(1.0 + 1.0));    // beyond endpoint b, diagonal
}

TEST_CASE("scalar even-odd parity on a square") {
    // unit square, counterclockwise
    const double ax[4] = {0, 1, 1, 0};
    const double ay[4] = {0, 0, 1, 1};
    const double bx[4] = {1, 1, 0, 0};
    const double by[4] = {0, 1, 1, 0};
    const double px[3] = {0.5, 1.5, -0.2};
    const double py[3] = {0.5, 0.5, 0.3};
    std::uint8_t parity[3] = {0, 0, 0};
    simd::scalar::evenodd_parity(px, py, 3, ax, ay, bx, by, 4, parity);
    CHECK(parity[0] == 1);
    CHECK(parity[1] == 0);
    CHECK(parity[2] == 0);
}

#if defined(SHAPEBO_HAVE_AVX2)

TEST_CASE("avx2 variants match the scalar reference") {
    if (!simd::avx2_supported()) return;

    for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
        // sizes chosen to exercise the vector tail paths
        const Soup s = random_soup(257, 53, seed);
        const std::size_t n = s.px.size();

        std::vector<double> d_ref(n), d_simd(n);
        simd::scalar::min_sqdist_to_segments(s.px.data(), s.py.data(), n, s.ax.data(), s.ay.data(),
                                             s.bx.data(), s.by.data(), s.ax.size(), d_ref.data());
        simd::avx2::min_sqdist_to_segments(s.px.data(), s.py.data(), n, s.ax.data(), s.ay.data(),
                                           s.bx.data(), s.by.data(), s.ax.size(), d_simd.data());
        for (std::size_t i = 0; i < n; ++i)
            CHECK(d_simd[i] == doctest::Approx(d_ref[i]).epsilon(1e-12));

        std::vector<std::uint8_t> p_ref(n, 0), p_simd(n, 0);
        simd::scalar::evenodd_parity(s.px.data(), s.py.data(), n, s.ax.data(), s.ay.data(),
                                     s.bx.data(), s.by.data(), s.ax.size(), p_ref.data());
        simd::avx2::evenodd_parity(s.px.data(), s.py.data(), n, s.ax.data(), s.ay.data(),
                                   s.bx.data(), s.by.data(), s.ax.size(), p_simd.data());
        for (std::size_t i = 0; i < n; ++i) CHECK(p_simd[i] == p_ref[i]);

        Rng rng = make_rng(seed, 9);
        std::vector<double> acc_ref(n), acc_simd(n), col(n);
        for (std::size_t i = 0; i < n; ++i) {
            acc_ref[i] = acc_simd[i] = uniform(rng);
            col[i] = uniform(rng, -5, 5);
        }
        simd::scalar::add_scaled_sqdiff(acc_ref.data(), col.data(), n, 0.37, 1.7);
        simd::avx2::add_scaled_sqdiff(acc_simd.data(), col.data(), n, 0.37, 1.7);
        for (std::size_t i = 0; i < n; ++i)
            CHECK(acc_simd[i] == doctest::Approx(acc_ref[i]).epsilon(1e-13));
    }
}

#endif

TEST_CASE("dispatched entry points agree with the scalar reference") {
    const Soup s = random_soup(130, 31, 7);
    const std::size_t n = s.px.size();
    std::vector<double> d_ref(n), d_active(n);
    simd::scalar::min_sqdist_to_segments(s.px.data(), s.py.data(), n, s.ax.data(), s.ay.data(),
                                         s.bx.data(), s.by.data(), s.ax.size(), d_ref.data());
    simd::min_sqdist_to_segments(s.px.data(), s.py.data(), n, s.ax.data(), s.ay.data(),
                                 s.bx.data(), s.by.data(), s.ax.size(), d_active.data());
    for (std::size_t i = 0; i < n; ++i)
        CHECK(d_active[i] == doctest::Approx(d_ref[i]).epsilon(1e-12));
    CHECK((simd::active_backend() == simd::Backend::Avx2 ||
           simd::active_backend() == simd::Backend::Scalar));
}
