#include "pflow/linop.hpp"

namespace pflow {

Field LinOp::apply(const Field& f) const
{
    if (!f.lat.same_geometry(dom))
        throw ConfigError("linop: apply domain mismatch");
    return fwd(f);
}

Field LinOp::apply_transpose(const Field& g) const
{
    if (!g.lat.same_geometry(cod))
        throw ConfigError("linop: transpose domain mismatch");
    return trn(g);
}

Field LinOp::kernel_column(std::int64_t x) const
{
    return fwd(delta_field(dom, x));
}

Field LinOp::kernel_row(std::int64_t y) const
{
    return trn(delta_field(cod, y));
}

LinOp identity_op(const Lattice& l)
{
    auto id = [](const Field& f) { return f; };
    return {l, l, id, id};
}

LinOp transpose_op(const LinOp& a)
{
    return {a.cod, a.dom, a.trn, a.fwd};
}

LinOp compose(const LinOp& a, const LinOp& b)
{
    if (!a.dom.same_geometry(b.cod))
        throw ConfigError("linop: compose shape mismatch");
    return {b.dom, a.cod,
            [a, b](const Field& f) { return a.fwd(b.fwd(f)); },
            [a, b](const Field& g) { return b.trn(a.trn(g)); }};
}

LinOp scale_op(cplx c, const LinOp& a)
{
    return {a.dom, a.cod,
            [c, a](const Field& f) { return c * a.fwd(f); },
            [c, a](const Field& g) { return c * a.trn(g); }};
}

LinOp add_op(const LinOp& a, const LinOp& b)
{
    if (!a.dom.same_geometry(b.dom) || !a.cod.same_geometry(b.cod))
        throw ConfigError("linop: add shape mismatch");
    return {a.dom, a.cod,
            [a, b](const Field& f) { return a.fwd(f) + b.fwd(f); },
            [a, b](const Field& g) { return a.trn(g) + b.trn(g); }};
}

Field fft_of(const Field& f)
{
    Field g = f;
    fft4(f.lat.dims(), g.v, false);
    return g;
}

Field ifft_of(const Field& f)
{
    Field g = f;
    fft4(f.lat.dims(), g.v, true);
    return g;
}

Field apply_multiplier(const Lattice& l, const std::vector<cplx>& mhat,
                       const Field& f)
{
    Field g = f;
    fft4(l.dims(), g.v, false);
    simd::active().cmul(g.v.data(), g.v.data(), mhat.data(), g.v.size());
    fft4(l.dims(), g.v, true);
    return g;
}

Field flip_field(const Field& f)
{
    const auto& dims = f.lat.dims();
    Field g(f.lat);
    for (std::int64_t i = 0; i < f.size(); ++i) {
        auto c = f.lat.coords_of(i);
        for (int a = 0; a < 4; ++a)
            c[a] = Lattice::mod(-c[a], dims[a]);
        g.v[f.lat.index_of(c)] = f.v[i];
    }
    return g;
}

LinOp multiplier_op(const Lattice& l, std::vector<cplx> mhat)
{
    if (static_cast<std::int64_t>(mhat.size()) != l.num_points())
        throw ConfigError("linop: multiplier table size mismatch");
    // transpose multiplier is m(-k)
    std::vector<cplx> mt(mhat.size());
    for (std::int64_t i = 0; i < l.num_points(); ++i) {
        auto c = l.coords_of(i);
        for (int a = 0; a < 4; ++a)
            c[a] = Lattice::mod(-c[a], l.dims()[a]);
        mt[l.index_of(c)] = mhat[i];
    }
    auto fwd = [l, m = std::move(mhat)](const Field& f) {
        return apply_multiplier(l, m, f);
    };
    auto trn = [l, m = std::move(mt)](const Field& f) {
        return apply_multiplier(l, m, f);
    };
    return {l, l, std::move(fwd), std::move(trn)};
}

std::vector<cplx> multiplier_of(const LinOp& a)
{
    if (!a.dom.same_geometry(a.cod))
        throw ConfigError("linop: multiplier_of needs an endomorphism");
    // column at 0 of a translation-invariant operator is s(x); mhat = FFT(s)
    Field col = a.kernel_column(0);
    col *= a.dom.cell_volume(); // delta has weight 1/vol
    fft4(a.dom.dims(), col.v, false);
    return col.v;
}

} // namespace pflow
