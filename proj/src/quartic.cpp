#include "pflow/quartic.hpp"

#include <numbers>

namespace pflow {

void SpatialKernel::add(const std::array<std::int64_t, 3>& off, double v)
{
    m[off] += v;
}

SpatialKernel SpatialKernel::onsite(double v0)
{
    SpatialKernel k;
    k.add({0, 0, 0}, v0);
    return k;
}

SpatialKernel SpatialKernel::nearest_neighbor(double v0, double v1)
{
    SpatialKernel k = onsite(v0);
    for (int ax = 0; ax < 3; ++ax)
        for (int s : {-1, 1}) {
            std::array<std::int64_t, 3> d{};
            d[ax] = s;
            k.add(d, v1);
        }
    return k;
}

std::vector<double> SpatialKernel::hat_table(std::int64_t Ns) const
{
    const double two_pi = 2.0 * std::numbers::pi;
    std::vector<double> t(Ns * Ns * Ns);
    std::int64_t i = 0;
    for (std::int64_t b = 0; b < Ns; ++b)
        for (std::int64_t c = 0; c < Ns; ++c)
            for (std::int64_t e = 0; e < Ns; ++e)
                t[i++] = hat_at({two_pi * b / Ns, two_pi * c / Ns, two_pi * e / Ns});
    return t;
}

double SpatialKernel::hat_at(const std::array<double, 3>& k) const
{
    double s = 0.0;
    for (const auto& [d, v] : m)
        s += v * std::cos(k[0] * d[0] + k[1] * d[1] + k[2] * d[2]);
    return s;
}

double SpatialKernel::hat_zero() const
{
    double s = 0.0;
    for (const auto& [d, v] : m)
        s += v;
    return s;
}

// ---------------------------------------------------------------------------

namespace {

using Off4 = std::array<std::int64_t, 4>;
using Offsets = QuarticKernel::Offsets;

Off4 mod_off(const Lattice& l, const Off4& o)
{
    Off4 r;
    for (int a = 0; a < 4; ++a)
        r[a] = Lattice::mod(o[a], l.dims()[a]);
    return r;
}

Off4 sub_off(const Lattice& l, const Off4& a, const Off4& b)
{
    Off4 r;
    for (int ax = 0; ax < 4; ++ax)
        r[ax] = Lattice::mod(a[ax] - b[ax], l.dims()[ax]);
    return r;
}

std::array<std::int64_t, 12> pack(const Lattice& l, const Offsets& o)
{
    std::array<std::int64_t, 12> k;
    for (int i = 0; i < 3; ++i) {
        const Off4 r = mod_off(l, o[i]);
        for (int a = 0; a < 4; ++a)
            k[4 * i + a] = r[a];
    }
    return k;
}

Offsets unpack(const std::array<std::int64_t, 12>& k)
{
    Offsets o;
    for (int i = 0; i < 3; ++i)
        for (int a = 0; a < 4; ++a)
            o[i][a] = k[4 * i + a];
    return o;
}

// symmetrization orbit {id, u1<->u3, u2<->u4, both} in offset coordinates
std::array<Offsets, 4> orbit(const Lattice& l, const Offsets& o)
{
    const Off4 zero{0, 0, 0, 0};
    const auto& [o2, o3, o4] = o;
    const Offsets s13{sub_off(l, o2, o3), sub_off(l, zero, o3), sub_off(l, o4, o3)};
    const Offsets s24{mod_off(l, o4), mod_off(l, o3), mod_off(l, o2)};
    const Offsets s1324{s13[2], s13[1], s13[0]};
    return {Offsets{mod_off(l, o2), mod_off(l, o3), mod_off(l, o4)}, s13, s24,
            s1324};
}

} // namespace

void QuarticKernel::add_symmetrized(const Offsets& off, double v)
{
    for (const auto& img : orbit(lat_, off))
        m_[pack(lat_, img)] += v / 4.0;
}

double QuarticKernel::at(const Offsets& off) const
{
    const auto it = m_.find(pack(lat_, off));
    return it == m_.end() ? 0.0 : it->second;
}

QuarticKernel QuarticKernel::rescaled(int steps) const
{
    LatticeSpec s = lat_.spec();
    s.j += steps;
    QuarticKernel out{Lattice(s)};
    const double mult =
        std::pow(static_cast<double>(lat_.spec().L), 14.0 * steps);
    out.m_ = m_;
    for (auto& [k, v] : out.m_)
        v *= mult;
    return out;
}

double QuarticKernel::average_rv() const
{
    double s = 0.0;
    for (const auto& [k, v] : m_)
        s += v;
    const double vol = lat_.cell_volume();
    return s * vol * vol * vol;
}

Field roll(const Field& f, const std::array<std::int64_t, 4>& off)
{
    const auto& d = f.lat.dims();
    // per-axis shifted coordinate tables
    std::array<std::vector<std::int64_t>, 4> tbl;
    for (int a = 0; a < 4; ++a) {
        tbl[a].resize(d[a]);
        for (std::int64_t x = 0; x < d[a]; ++x)
            tbl[a][x] = Lattice::mod(x + off[a], d[a]);
    }
    Field g(f.lat);
    std::int64_t i = 0;
    for (std::int64_t a = 0; a < d[0]; ++a)
        for (std::int64_t b = 0; b < d[1]; ++b)
            for (std::int64_t c = 0; c < d[2]; ++c)
                for (std::int64_t e = 0; e < d[3]; ++e)
                    g.v[i++] = f.v[((tbl[0][a] * d[1] + tbl[1][b]) * d[2] +
                                    tbl[2][c]) * d[3] + tbl[3][e]];
    return g;
}

namespace quartic {

cplx eval_mixed(const QuarticKernel& V, const Field& a1, const Field& a2,
                const Field& a3, const Field& a4)
{
    const Lattice& l = V.lattice();
    if (!a1.lat.same_geometry(l) || !a2.lat.same_geometry(l) ||
        !a3.lat.same_geometry(l) || !a4.lat.same_geometry(l))
        throw ConfigError("quartic: field lattice mismatch");
    const auto& k = simd::active();
    cplx total{};
    std::vector<cplx> prod(l.num_points());
    for (const auto& [key, v] : V.entries()) {
        const auto off = unpack(key);
        const Field s2 = roll(a2, off[0]);
        const Field s3 = roll(a3, off[1]);
        const Field s4 = roll(a4, off[2]);
        k.cmul(prod.data(), a1.v.data(), s2.v.data(), prod.size());
        k.cmul(prod.data(), prod.data(), s3.v.data(), prod.size());
        total += v * k.dot_bilinear(prod.data(), s4.v.data(), prod.size());
    }
    const double vol = l.cell_volume();
    return 0.5 * vol * vol * vol * vol * total;
}

cplx eval(const QuarticKernel& V, const Field& phis, const Field& phi)
{
    return eval_mixed(V, phis, phi, phis, phi);
}

Field grad_star(const QuarticKernel& V, const Field& z1, const Field& z,
                const Field& z2)
{
    const Lattice& l = V.lattice();
    Field g(l);
    std::vector<cplx> prod(l.num_points());
    const auto& k = simd::active();
    for (const auto& [key, v] : V.entries()) {
        const auto off = unpack(key);
        const Field s2 = roll(z, off[0]);
        const Field s3 = roll(z2, off[1]);
        k.cmul(prod.data(), z1.v.data(), s2.v.data(), prod.size());
        k.cmul(prod.data(), prod.data(), s3.v.data(), prod.size());
        // contribution lands at u = u1 + o4
        const std::array<std::int64_t, 4> neg{-off[2][0], -off[2][1], -off[2][2],
                                              -off[2][3]};
        const Field t = roll(Field(l, prod), neg);
        k.axpy(g.v.data(), cplx{v, 0.0}, t.v.data(), g.v.size());
    }
    const double vol = l.cell_volume();
    g *= vol * vol * vol;
    return g;
}

Field grad(const QuarticKernel& V, const Field& z1, const Field& zs,
           const Field& z2)
{
    const Lattice& l = V.lattice();
    Field g(l);
    std::vector<cplx> prod(l.num_points());
    const auto& k = simd::active();
    for (const auto& [key, v] : V.entries()) {
        const auto off = unpack(key);
        const Field s2 = roll(z1, off[0]);
        const Field s3 = roll(zs, off[1]);
        const Field s4 = roll(z2, off[2]);
        k.cmul(prod.data(), s2.v.data(), s3.v.data(), prod.size());
        k.cmul(prod.data(), prod.data(), s4.v.data(), prod.size());
        k.axpy(g.v.data(), cplx{v, 0.0}, prod.data(), g.v.size());
    }
    const double vol = l.cell_volume();
    g *= vol * vol * vol;
    return g;
}

Field grad_wrt_phis(const QuarticKernel& V, const Field& phis, const Field& phi)
{
    return grad(V, phi, phis, phi);
}

Field grad_wrt_phi(const QuarticKernel& V, const Field& phis, const Field& phi)
{
    return grad_star(V, phis, phi, phis);
}

} // namespace quartic

QuarticKernel onsite_quartic(const Lattice& l, double lambda, double nn_tail)
{
    QuarticKernel V(l);
    const Off4 zero{0, 0, 0, 0};
    V.add_symmetrized({zero, zero, zero}, lambda);
    if (nn_tail != 0.0) {
        for (int ax = 1; ax < 4; ++ax)
            for (int s : {-1, 1}) {
                Off4 d{};
                d[ax] = s;
                // a short-range tail coupling the (u1,u2) pair to a shifted
                // (u3,u4) pair
                V.add_symmetrized({zero, d, d}, nn_tail);
            }
    }
    return V;
}

QuarticKernel build_vtheta(const Lattice& l, const SpatialKernel& v,
                           const KineticSpec& kin, int steps)
{
    if (steps < 1)
        throw ConfigError("vtheta: need at least one quadrature panel");
    const std::int64_t Ns = l.dims()[1];
    if (l.dims()[2] != Ns || l.dims()[3] != Ns)
        throw ConfigError("vtheta: anisotropic spatial dims");
    const std::int64_t n3 = Ns * Ns * Ns;
    const std::array<std::int64_t, 4> sd{1, Ns, Ns, Ns};
    const double theta = kin.theta;
    const double two_pi = 2.0 * std::numbers::pi;

    // spatial momentum tables: h(k) without the theta factor
    std::vector<double> hk(n3);
    {
        std::int64_t i = 0;
        for (std::int64_t b = 0; b < Ns; ++b)
            for (std::int64_t c = 0; c < Ns; ++c)
                for (std::int64_t e = 0; e < Ns; ++e)
                    hk[i++] = kin.h0_hat(two_pi * b / Ns, two_pi * c / Ns,
                                         two_pi * e / Ns) /
                              theta;
    }
    const std::vector<double> vhat = v.hat_table(Ns);

    auto heat = [&](double t) { // spatial heat kernel e^{-t h} as a vector
        std::vector<cplx> g(n3);
        for (std::int64_t i = 0; i < n3; ++i)
            g[i] = std::exp(-t * hk[i]);
        fft4(sd, g, true); // inverse transform of the multiplier = kernel row
        return g;
    };

    QuarticKernel out(l);
    auto sidx = [&](std::int64_t b, std::int64_t c, std::int64_t e) {
        return (Lattice::mod(b, Ns) * Ns + Lattice::mod(c, Ns)) * Ns +
               Lattice::mod(e, Ns);
    };

    // trapezoid nodes
    std::vector<double> tnode(steps + 1), tw(steps + 1);
    for (int i = 0; i <= steps; ++i) {
        tnode[i] = theta * i / steps;
        tw[i] = theta / steps * (i == 0 || i == steps ? 0.5 : 1.0);
    }

    // accumulate per offset triple (spatial); temporal structure fixed
    std::vector<double> acc(n3 * n3 * n3, 0.0);
    std::vector<cplx> conv(n3);
    for (int ti = 0; ti <= steps; ++ti) {
        const auto Ht = heat(tnode[ti]);
        const auto Hs = heat(theta - tnode[ti]);
        // A_t(x; p, q) = Ht(x-p) Hs(x-q); C(x; o3, o4) = sum_y v(x-y) A_t(y; o3,o4)
        for (std::int64_t io3 = 0; io3 < n3; ++io3) {
            const auto c3 = std::array<std::int64_t, 3>{io3 / (Ns * Ns),
                                                        (io3 / Ns) % Ns, io3 % Ns};
            for (std::int64_t io4 = 0; io4 < n3; ++io4) {
                const auto c4 = std::array<std::int64_t, 3>{
                    io4 / (Ns * Ns), (io4 / Ns) % Ns, io4 % Ns};
                // build A_t(y; o3, o4) then convolve with v via FFT
                for (std::int64_t b = 0; b < Ns; ++b)
                    for (std::int64_t c = 0; c < Ns; ++c)
                        for (std::int64_t e = 0; e < Ns; ++e)
                            conv[sidx(b, c, e)] =
                                Ht[sidx(b - c3[0], c - c3[1], e - c3[2])] *
                                Hs[sidx(b - c4[0], c - c4[1], e - c4[2])];
                fft4(sd, conv, false);
                for (std::int64_t i = 0; i < n3; ++i)
                    conv[i] *= vhat[i];
                fft4(sd, conv, true);
                // contract against A_t(x; 0, o2) for every o2
                for (std::int64_t io2 = 0; io2 < n3; ++io2) {
                    const auto c2 = std::array<std::int64_t, 3>{
                        io2 / (Ns * Ns), (io2 / Ns) % Ns, io2 % Ns};
                    double s = 0.0;
                    for (std::int64_t b = 0; b < Ns; ++b)
                        for (std::int64_t c = 0; c < Ns; ++c)
                            for (std::int64_t e = 0; e < Ns; ++e)
                                s += (Ht[sidx(b, c, e)] *
                                      Hs[sidx(b - c2[0], c - c2[1], e - c2[2])] *
                                      conv[sidx(b, c, e)])
                                         .real();
                    acc[(io2 * n3 + io3) * n3 + io4] += tw[ti] * s;
                }
            }
        }
    }

    // insert with the temporal delta structure; the second term of the kernel
    // is generated by the u1<->u3 symmetrization
    for (std::int64_t io2 = 0; io2 < n3; ++io2)
        for (std::int64_t io3 = 0; io3 < n3; ++io3)
            for (std::int64_t io4 = 0; io4 < n3; ++io4) {
                const double val = acc[(io2 * n3 + io3) * n3 + io4];
                if (val == 0.0)
                    continue;
                const Off4 o2{1, io2 / (Ns * Ns), (io2 / Ns) % Ns, io2 % Ns};
                const Off4 o3{0, io3 / (Ns * Ns), (io3 / Ns) % Ns, io3 % Ns};
                const Off4 o4{1, io4 / (Ns * Ns), (io4 / Ns) % Ns, io4 % Ns};
                // add_symmetrized averages the orbit; the two analytic terms
                // are each other's u1<->u3 images, so inserting 2x the first
                // term reproduces their sum
                out.add_symmetrized({o2, o3, o4}, 2.0 * val);
            }
    return out;
}

} // namespace pflow
