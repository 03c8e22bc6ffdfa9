#include "pflow/lattice.hpp"

#include <cmath>

namespace pflow {

std::int64_t integer_pow(std::int64_t base, int e)
{
    std::int64_t r = 1;
    for (int i = 0; i < e; ++i)
        r *= base;
    return r;
}

namespace {

bool is_power_of(std::int64_t v, std::int64_t base, int& exp_out)
{
    int e = 0;
    while (v > 1) {
        if (v % base != 0)
            return false;
        v /= base;
        ++e;
    }
    exp_out = e;
    return v == 1;
}

} // namespace

Lattice::Lattice(const LatticeSpec& spec) : spec_(spec)
{
    if (spec.L < 3 || spec.L % 2 == 0)
        throw ConfigError("lattice: L must be odd and >= 3, got " +
                          std::to_string(spec.L));
    int et = 0, es = 0;
    if (!is_power_of(spec.Ltp, spec.L, et) || et == 0 || et % 2 != 0)
        throw ConfigError("lattice: Ltp must be a positive even power of L");
    if (!is_power_of(spec.Lsp, spec.L, es) || es == 0)
        throw ConfigError("lattice: Lsp must be a positive power of L");
    if (spec.j < -1)
        throw ConfigError("lattice: scale index j must be >= -1");
    if (spec.n < 0)
        throw ConfigError("lattice: block index n must be >= 0");

    // The torus is degenerate unless both the point counts Ltp/L^{2n},
    // Lsp/L^n and the physical extents Ltp/L^{2(n+j)}, Lsp/L^{n+j} divide out.
    const int jeff = std::max(spec.j, 0);
    if (et < 2 * (spec.n + jeff) || es < spec.n + jeff)
        throw ConfigError("lattice: degenerate torus, Ltp/L^{2(n+j)} or "
                          "Lsp/L^{n+j} is not a positive integer");

    dims_[0] = spec.Ltp / integer_pow(spec.L, 2 * spec.n);
    dims_[1] = dims_[2] = dims_[3] = spec.Lsp / integer_pow(spec.L, spec.n);
    npts_ = dims_[0] * dims_[1] * dims_[2] * dims_[3];

    eps_t_ = std::pow(static_cast<double>(spec.L), -2.0 * spec.j);
    eps_sp_ = std::pow(static_cast<double>(spec.L), -1.0 * spec.j);
    vol_ = std::pow(static_cast<double>(spec.L), -5.0 * spec.j);
}

double Lattice::distance(std::int64_t i, std::int64_t k) const
{
    const auto a = coords_of(i);
    const auto b = coords_of(k);
    std::array<std::int64_t, 4> d{};
    for (int ax = 0; ax < 4; ++ax)
        d[ax] = a[ax] - b[ax];
    return offset_norm(d);
}

double Lattice::offset_norm(const std::array<std::int64_t, 4>& d) const
{
    double s = 0.0;
    for (int ax = 0; ax < 4; ++ax) {
        std::int64_t w = mod(d[ax], dims_[ax]);
        if (w > dims_[ax] - w)
            w = dims_[ax] - w; // minimal image
        const double phys = w * (ax == 0 ? eps_t_ : eps_sp_);
        s += phys * phys;
    }
    return std::sqrt(s);
}

Lattice make_lattice(const LatticeSpec& spec) { return Lattice(spec); }

double distance_between(const Lattice& a, std::int64_t ia, const Lattice& b,
                        std::int64_t ib)
{
    const auto pa = a.physical(ia);
    const auto pb = b.physical(ib);
    double s = 0.0;
    for (int ax = 0; ax < 4; ++ax) {
        const double ext = a.dims()[ax] * a.spacing(ax);
        const double extb = b.dims()[ax] * b.spacing(ax);
        if (std::abs(ext - extb) > 1e-9 * ext)
            throw ConfigError("distance_between: lattices span different tori");
        double d = std::fmod(std::abs(pa[ax] - pb[ax]), ext);
        d = std::min(d, ext - d);
        s += d * d;
    }
    return std::sqrt(s);
}

Lattice coarser_relabel(const Lattice& from)
{
    LatticeSpec s = from.spec();
    s.j -= 1;
    if (s.j < -1)
        throw ConfigError("relabel: scale index below -1");
    return Lattice(s);
}

Lattice finer_relabel(const Lattice& from)
{
    LatticeSpec s = from.spec();
    s.j += 1;
    return Lattice(s);
}

} // namespace pflow
