#ifndef PFLOW_SIMD_HPP
#define PFLOW_SIMD_HPP

#include <complex>
#include <cstddef>

// Vectorized primitives for complex<double> arrays. A scalar reference
// implementation is always available; an AVX2 variant is selected at runtime
// when the CPU supports it. Both variants accumulate reductions in a fixed
// order, so results are reproducible run-to-run on the same machine.

namespace pflow::simd {

using cplx = std::complex<double>;

struct Kernels {
    const char* name;
    void (*axpy)(cplx* y, cplx a, const cplx* x, std::size_t n);       // y += a*x
    void (*scale)(cplx* y, cplx a, std::size_t n);                     // y *= a
    void (*cmul)(cplx* z, const cplx* x, const cplx* y, std::size_t n);// z = x.*y
    cplx (*dot_bilinear)(const cplx* x, const cplx* y, std::size_t n); // sum x*y, no conjugation
    cplx (*sum)(const cplx* x, std::size_t n);
    double (*sum_abs2)(const cplx* x, std::size_t n);
    double (*sup_abs)(const cplx* x, std::size_t n);
};

const Kernels& scalar_kernels();

// AVX2 variant; null when the binary was built without AVX2 support.
const Kernels* avx2_kernels();

// Active kernel set: AVX2 when available and not disabled, scalar otherwise.
// Set PFLOW_NO_SIMD=1 in the environment (or call force_scalar) to pin the
// scalar path.
const Kernels& active();
void force_scalar(bool on);

} // namespace pflow::simd

#endif
