#ifndef PFLOW_LATTICE_HPP
#define PFLOW_LATTICE_HPP

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace pflow {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Space-time torus in the scale hierarchy. The scale index j sets the
// spacings (1/L^{2j} temporal, 1/L^j spatial); the block index n sets the
// point count (Ltp/L^{2n} temporal sites, Lsp/L^n per spatial axis), which is
// independent of j. j = -1 is allowed (spacings L^2 and L).
struct LatticeSpec {
    std::int64_t L = 3;    // odd scaling ratio, >= 3
    std::int64_t Ltp = 9;  // temporal extent of the base torus, even power of L
    std::int64_t Lsp = 3;  // spatial extent of the base torus, power of L
    int j = 0;             // scale index, >= -1
    int n = 0;             // block index, >= 0

    friend bool operator==(const LatticeSpec&, const LatticeSpec&) = default;
};

class Lattice {
public:
    Lattice() = default;
    explicit Lattice(const LatticeSpec& spec);

    const LatticeSpec& spec() const { return spec_; }
    std::int64_t num_points() const { return npts_; }
    // index dims, time first
    const std::array<std::int64_t, 4>& dims() const { return dims_; }

    double spacing(int nu) const { return nu == 0 ? eps_t_ : eps_sp_; }
    double temporal_spacing() const { return eps_t_; }
    double spatial_spacing() const { return eps_sp_; }
    double cell_volume() const { return vol_; }

    // row-major enumeration, time slowest
    std::int64_t index_of(const std::array<std::int64_t, 4>& c) const
    {
        std::int64_t idx = mod(c[0], dims_[0]);
        for (int a = 1; a < 4; ++a)
            idx = idx * dims_[a] + mod(c[a], dims_[a]);
        return idx;
    }
    std::array<std::int64_t, 4> coords_of(std::int64_t idx) const
    {
        std::array<std::int64_t, 4> c{};
        for (int a = 3; a >= 1; --a) {
            c[a] = idx % dims_[a];
            idx /= dims_[a];
        }
        c[0] = idx;
        return c;
    }

    // physical coordinates in units of the spacings
    std::array<double, 4> physical(std::int64_t idx) const
    {
        const auto c = coords_of(idx);
        return {c[0] * eps_t_, c[1] * eps_sp_, c[2] * eps_sp_, c[3] * eps_sp_};
    }

    // torus Euclidean distance on physical coordinates, per-axis minimal image
    double distance(std::int64_t i, std::int64_t k) const;

    // distance of the offset (in index steps) from the origin
    double offset_norm(const std::array<std::int64_t, 4>& d) const;

    bool same_geometry(const Lattice& o) const { return spec_ == o.spec_; }
    bool same_index_shape(const Lattice& o) const { return dims_ == o.dims_; }

    static std::int64_t mod(std::int64_t a, std::int64_t m)
    {
        const std::int64_t r = a % m;
        return r < 0 ? r + m : r;
    }

private:
    LatticeSpec spec_{};
    std::array<std::int64_t, 4> dims_{1, 1, 1, 1};
    std::int64_t npts_ = 1;
    double eps_t_ = 1.0, eps_sp_ = 1.0, vol_ = 1.0;
};

Lattice make_lattice(const LatticeSpec& spec);

// The linear isomorphism (u0,u) -> (L^2 u0, L u) from X_j^(n) to X_{j-1}^(n).
// Point counts agree and the map is the identity on enumeration indices; this
// returns the relabeled lattice.
Lattice coarser_relabel(const Lattice& from); // j -> j-1
Lattice finer_relabel(const Lattice& from);   // j -> j+1

// The sublattice X_{j}^{(n)} -> X_{j+k}^{(n-k)} view used by the averaging
// chain: same spacing family, n decreases as j increases.
std::int64_t integer_pow(std::int64_t base, int e);

// torus distance between points of two lattices sharing the same physical
// torus (equal extent per axis)
double distance_between(const Lattice& a, std::int64_t ia, const Lattice& b,
                        std::int64_t ib);

} // namespace pflow

#endif
