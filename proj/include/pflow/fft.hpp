#ifndef PFLOW_FFT_HPP
#define PFLOW_FFT_HPP

#include <array>
#include <complex>
#include <cstdint>
#include <vector>

namespace pflow {

// 4-d complex DFT on the index grid (time slowest, row-major), convention
//   fhat(k) = sum_x f(x) e^{-i 2pi k.x/N},  f(x) = (1/|N|) sum_k fhat(k) e^{+...}.
// Plans are cached per shape and created with FFTW_ESTIMATE so planning is
// reproducible. Not thread-safe.
void fft4(const std::array<std::int64_t, 4>& dims,
          std::vector<std::complex<double>>& data, bool inverse);

} // namespace pflow

#endif
