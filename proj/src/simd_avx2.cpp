#include "pflow/simd.hpp"

#ifdef PFLOW_HAVE_AVX2

#include <cmath>
#include <immintrin.h>

namespace pflow::simd {
namespace {

// One __m256d holds two complex<double> values [re0 im0 re1 im1].

inline __m256d cmul2(__m256d x, __m256d y)
{
    const __m256d xre = _mm256_movedup_pd(x);        // [a0 a0 a1 a1]
    const __m256d xim = _mm256_permute_pd(x, 0xF);   // [b0 b0 b1 b1]
    const __m256d ysw = _mm256_permute_pd(y, 0x5);   // [d0 c0 d1 c1]
    return _mm256_fmaddsub_pd(xre, y, _mm256_mul_pd(xim, ysw));
}

void axpy_v(cplx* y, cplx a, const cplx* x, std::size_t n)
{
    const __m256d va = _mm256_setr_pd(a.real(), a.imag(), a.real(), a.imag());
    std::size_t i = 0;
    auto* yd = reinterpret_cast<double*>(y);
    const auto* xd = reinterpret_cast<const double*>(x);
    for (; i + 2 <= n; i += 2) {
        const __m256d vx = _mm256_loadu_pd(xd + 2 * i);
        const __m256d vy = _mm256_loadu_pd(yd + 2 * i);
        _mm256_storeu_pd(yd + 2 * i, _mm256_add_pd(vy, cmul2(va, vx)));
    }
    for (; i < n; ++i)
        y[i] += a * x[i];
}

void scale_v(cplx* y, cplx a, std::size_t n)
{
    const __m256d va = _mm256_setr_pd(a.real(), a.imag(), a.real(), a.imag());
    std::size_t i = 0;
    auto* yd = reinterpret_cast<double*>(y);
    for (; i + 2 <= n; i += 2) {
        const __m256d vy = _mm256_loadu_pd(yd + 2 * i);
        _mm256_storeu_pd(yd + 2 * i, cmul2(va, vy));
    }
    for (; i < n; ++i)
        y[i] *= a;
}

void cmul_v(cplx* z, const cplx* x, const cplx* y, std::size_t n)
{
    std::size_t i = 0;
    auto* zd = reinterpret_cast<double*>(z);
    const auto* xd = reinterpret_cast<const double*>(x);
    const auto* yd = reinterpret_cast<const double*>(y);
    for (; i + 2 <= n; i += 2) {
        const __m256d vx = _mm256_loadu_pd(xd + 2 * i);
        const __m256d vy = _mm256_loadu_pd(yd + 2 * i);
        _mm256_storeu_pd(zd + 2 * i, cmul2(vx, vy));
    }
    for (; i < n; ++i)
        z[i] = x[i] * y[i];
}

cplx dot_v(const cplx* x, const cplx* y, std::size_t n)
{
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    const auto* xd = reinterpret_cast<const double*>(x);
    const auto* yd = reinterpret_cast<const double*>(y);
    for (; i + 2 <= n; i += 2) {
        const __m256d vx = _mm256_loadu_pd(xd + 2 * i);
        const __m256d vy = _mm256_loadu_pd(yd + 2 * i);
        acc = _mm256_add_pd(acc, cmul2(vx, vy));
    }
    alignas(32) double lanes[4];
    _mm256_store_pd(lanes, acc);
    double re = lanes[0] + lanes[2];
    double im = lanes[1] + lanes[3];
    for (; i < n; ++i) {
        const cplx p = x[i] * y[i];
        re += p.real();
        im += p.imag();
    }
    return {re, im};
}

cplx sum_v(const cplx* x, std::size_t n)
{
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    const auto* xd = reinterpret_cast<const double*>(x);
    for (; i + 2 <= n; i += 2)
        acc = _mm256_add_pd(acc, _mm256_loadu_pd(xd + 2 * i));
    alignas(32) double lanes[4];
    _mm256_store_pd(lanes, acc);
    double re = lanes[0] + lanes[2];
    double im = lanes[1] + lanes[3];
    for (; i < n; ++i) {
        re += x[i].real();
        im += x[i].imag();
    }
    return {re, im};
}

double sum_abs2_v(const cplx* x, std::size_t n)
{
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    const auto* xd = reinterpret_cast<const double*>(x);
    for (; i + 2 <= n; i += 2) {
        const __m256d vx = _mm256_loadu_pd(xd + 2 * i);
        acc = _mm256_fmadd_pd(vx, vx, acc);
    }
    alignas(32) double lanes[4];
    _mm256_store_pd(lanes, acc);
    double s = (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]);
    for (; i < n; ++i)
        s += x[i].real() * x[i].real() + x[i].imag() * x[i].imag();
    return s;
}

double sup_abs_v(const cplx* x, std::size_t n)
{
    __m256d mx = _mm256_setzero_pd();
    std::size_t i = 0;
    const auto* xd = reinterpret_cast<const double*>(x);
    for (; i + 2 <= n; i += 2) {
        const __m256d vx = _mm256_loadu_pd(xd + 2 * i);
        const __m256d sq = _mm256_mul_pd(vx, vx);
        const __m256d sw = _mm256_permute_pd(sq, 0x5);
        mx = _mm256_max_pd(mx, _mm256_add_pd(sq, sw)); // |x|^2 in each slot
    }
    alignas(32) double lanes[4];
    _mm256_store_pd(lanes, mx);
    double m2 = std::max(std::max(lanes[0], lanes[1]),
                         std::max(lanes[2], lanes[3]));
    double m = std::sqrt(m2);
    for (; i < n; ++i)
        m = std::max(m, std::abs(x[i]));
    return m;
}

} // namespace

const Kernels* avx2_kernels()
{
    static const Kernels k = {"avx2", axpy_v,     scale_v,    cmul_v,
                              dot_v,  sum_v,      sum_abs2_v, sup_abs_v};
    return &k;
}

} // namespace pflow::simd

#else

namespace pflow::simd {
const Kernels* avx2_kernels() { return nullptr; }
} // namespace pflow::simd

#endif
