#include "pflow/fft.hpp"

#include <fftw3.h>

#include <map>
#include <stdexcept>

namespace pflow {

namespace {

struct PlanPair {
    fftw_plan fwd = nullptr;
    fftw_plan bwd = nullptr;
    fftw_complex* buf = nullptr;
    std::size_t n = 0;
};

std::map<std::array<std::int64_t, 4>, PlanPair>& plan_cache()
{
    static std::map<std::array<std::int64_t, 4>, PlanPair> cache;
    return cache;
}

PlanPair& plans_for(const std::array<std::int64_t, 4>& dims)
{
    auto& cache = plan_cache();
    auto it = cache.find(dims);
    if (it != cache.end())
        return it->second;

    PlanPair p;
    p.n = static_cast<std::size_t>(dims[0] * dims[1] * dims[2] * dims[3]);
    p.buf = fftw_alloc_complex(p.n);
    if (p.buf == nullptr)
        throw std::bad_alloc();
    const int nd[4] = {static_cast<int>(dims[0]), static_cast<int>(dims[1]),
                       static_cast<int>(dims[2]), static_cast<int>(dims[3])};
    p.fwd = fftw_plan_dft(4, nd, p.buf, p.buf, FFTW_FORWARD, FFTW_ESTIMATE);
    p.bwd = fftw_plan_dft(4, nd, p.buf, p.buf, FFTW_BACKWARD, FFTW_ESTIMATE);
    if (p.fwd == nullptr || p.bwd == nullptr)
        throw std::runtime_error("fft: planning failed");
    return cache.emplace(dims, p).first->second;
}

} // namespace

void fft4(const std::array<std::int64_t, 4>& dims,
          std::vector<std::complex<double>>& data, bool inverse)
{
    PlanPair& p = plans_for(dims);
    if (data.size() != p.n)
        throw std::runtime_error("fft: size mismatch");
    auto* b = reinterpret_cast<std::complex<double>*>(p.buf);
    std::copy(data.begin(), data.end(), b);
    fftw_execute(inverse ? p.bwd : p.fwd);
    if (inverse) {
        const double inv = 1.0 / static_cast<double>(p.n);
        for (std::size_t i = 0; i < p.n; ++i)
            data[i] = b[i] * inv;
    } else {
        std::copy(b, b + p.n, data.begin());
    }
}

} // namespace pflow
