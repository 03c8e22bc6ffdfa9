#ifndef PFLOW_RNG_HPP
#define PFLOW_RNG_HPP

#include <complex>
#include <cstdint>

namespace pflow {

// xoshiro256++ with splitmix64 seeding. Self-contained so that streams are
// bit-identical across platforms and standard libraries.
class Rng {
public:
    explicit Rng(std::uint64_t seed)
    {
        std::uint64_t z = seed;
        for (auto& w : s_) {
            z += 0x9e3779b97f4a7c15ULL;
            std::uint64_t x = z;
            x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
            x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
            w = x ^ (x >> 31);
        }
    }

    std::uint64_t next()
    {
        const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    // uniform in [0,1)
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    // uniform in [-1,1)
    double sym() { return 2.0 * uniform() - 1.0; }

    std::complex<double> cplx_sym() { return {sym(), sym()}; }

private:
    static std::uint64_t rotl(std::uint64_t x, int k)
    {
        return (x << k) | (x >> (64 - k));
    }
    std::uint64_t s_[4];
};

} // namespace pflow

#endif
