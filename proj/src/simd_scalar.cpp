#include "pflow/simd.hpp"

#include <cmath>

namespace pflow::simd {
namespace {

void axpy_s(cplx* y, cplx a, const cplx* x, std::size_t n)
{
    for (std::size_t i = 0; i < n; ++i)
        y[i] += a * x[i];
}

void scale_s(cplx* y, cplx a, std::size_t n)
{
    for (std::size_t i = 0; i < n; ++i)
        y[i] *= a;
}

void cmul_s(cplx* z, const cplx* x, const cplx* y, std::size_t n)
{
    for (std::size_t i = 0; i < n; ++i)
        z[i] = x[i] * y[i];
}

cplx dot_s(const cplx* x, const cplx* y, std::size_t n)
{
    double re = 0.0, im = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const cplx p = x[i] * y[i];
        re += p.real();
        im += p.imag();
    }
    return {re, im};
}

cplx sum_s(const cplx* x, std::size_t n)
{
    double re = 0.0, im = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        re += x[i].real();
        im += x[i].imag();
    }
    return {re, im};
}

double sum_abs2_s(const cplx* x, std::size_t n)
{
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        s += x[i].real() * x[i].real() + x[i].imag() * x[i].imag();
    return s;
}

double sup_abs_s(const cplx* x, std::size_t n)
{
    double m = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        m = std::max(m, std::abs(x[i]));
    return m;
}

} // namespace

const Kernels& scalar_kernels()
{
    static const Kernels k = {"scalar", axpy_s,     scale_s,    cmul_s,
                              dot_s,    sum_s,      sum_abs2_s, sup_abs_s};
    return k;
}

} // namespace pflow::simd
