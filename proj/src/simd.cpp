#include "pflow/simd.hpp"

#include <atomic>
#include <cstdlib>

namespace pflow::simd {
namespace {

std::atomic<bool> g_force_scalar{false};

bool avx2_supported()
{
#if defined(__x86_64__) || defined(__i386__)
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

bool env_disabled()
{
    const char* v = std::getenv("PFLOW_NO_SIMD");
    return v != nullptr && v[0] != '\0' && v[0] != '0';
}

} // namespace

void force_scalar(bool on) { g_force_scalar.store(on); }

const Kernels& active()
{
    static const bool use_avx2 =
        avx2_kernels() != nullptr && avx2_supported() && !env_disabled();
    if (g_force_scalar.load() || !use_avx2)
        return scalar_kernels();
    return *avx2_kernels();
}

} // namespace pflow::simd
