#pragma once

#include <cstddef>
#include <cstdint>

// Batched geometric/arithmetic primitives behind runtime CPU dispatch.
// Scalar implementations are the reference; the AVX2 variants must agree
// with them (see tests/test_simd.cpp). Selection happens once at startup:
// AVX2 when the CPU supports it, unless SHAPEBO_SIMD=scalar is set in the
// environment.

namespace shapebo::simd {

enum class Backend { Scalar, Avx2 };

Backend active_backend();
const char* backend_name();
bool avx2_compiled();
bool avx2_supported();

/// out[i] = min over segments (a_s,b_s) of squared distance from point i.
void min_sqdist_to_segments(const double* px, const double* py, std::size_t npts,
                            const double* ax, const double* ay,
                            const double* bx, const double* by, std::size_t nseg,
                            double* out);

/// XOR-accumulate even-odd ray-crossing parity of each point against the
/// given segment soup. parity[i] must be initialized by the caller (0 for a
/// fresh shape); calling once per loop of a multi-loop shape yields the
/// even-odd rule over the union.
void evenodd_parity(const double* px, const double* py, std::size_t npts,
                    const double* ax, const double* ay,
                    const double* bx, const double* by, std::size_t nseg,
                    std::uint8_t* parity);

/// acc[i] += ((col[i] - q) * inv_theta)^2 — one coordinate of an anisotropic
/// squared distance between a query and n stored inputs (column-major data).
void add_scaled_sqdiff(double* acc, const double* col, std::size_t n,
                       double q, double inv_theta);

namespace scalar {
void min_sqdist_to_segments(const double* px, const double* py, std::size_t npts,
                            const double* ax, const double* ay,
                            const double* bx, const double* by, std::size_t nseg,
                            double* out);
void evenodd_parity(const double* px, const double* py, std::size_t npts,
                    const double* ax, const double* ay,
                    const double* bx, const double* by, std::size_t nseg,
                    std::uint8_t* parity);
void add_scaled_sqdiff(double* acc, const double* col, std::size_t n,
                       double q, double inv_theta);
} // namespace scalar

namespace avx2 {
// Present only when compiled for x86-64; callable only if avx2_supported().
void min_sqdist_to_segments(const double* px, const double* py, std::size_t npts,
                            const double* ax, const double* ay,
                            const double* bx, const double* by, std::size_t nseg,
                            double* out);
void evenodd_parity(const double* px, const double* py, std::size_t npts,
                    const double* ax, const double* ay,
                    const double* bx, const double* by, std::size_t nseg,
                    std::uint8_t* parity);
void add_scaled_sqdiff(double* acc, const double* col, std::size_t n,
                       double q, double inv_theta);
} // namespace avx2

} // namespace shapebo::simd
