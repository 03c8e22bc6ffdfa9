#include "pflow/field.hpp"

#include <cmath>

namespace pflow {

namespace {

void require_same(const Field& a, const Field& b, const char* what)
{
    if (!a.lat.same_geometry(b.lat))
        throw ConfigError(std::string("field: lattice mismatch in ") + what);
}

} // namespace

Field& Field::operator+=(const Field& o)
{
    require_same(*this, o, "operator+=");
    simd::active().axpy(v.data(), cplx{1.0, 0.0}, o.v.data(), v.size());
    return *this;
}

Field& Field::operator-=(const Field& o)
{
    require_same(*this, o, "operator-=");
    simd::active().axpy(v.data(), cplx{-1.0, 0.0}, o.v.data(), v.size());
    return *this;
}

Field& Field::operator*=(cplx a)
{
    simd::active().scale(v.data(), a, v.size());
    return *this;
}

Field operator+(Field a, const Field& b) { return a += b; }
Field operator-(Field a, const Field& b) { return a -= b; }
Field operator*(cplx a, Field f) { return f *= a; }

Field conj(const Field& f)
{
    Field g(f.lat);
    for (std::int64_t i = 0; i < f.size(); ++i)
        g.v[i] = std::conj(f.v[i]);
    return g;
}

cplx inner(const Field& f, const Field& g)
{
    require_same(f, g, "inner");
    const cplx s = simd::active().dot_bilinear(f.v.data(), g.v.data(), f.v.size());
    return f.lat.cell_volume() * s;
}

Field random_field(const Lattice& l, Rng& rng, double amplitude)
{
    Field f(l);
    for (auto& z : f.v)
        z = amplitude * rng.cplx_sym();
    return f;
}

Field constant_field(const Lattice& l, cplx c)
{
    Field f(l);
    for (auto& z : f.v)
        z = c;
    return f;
}

Field delta_field(const Lattice& l, std::int64_t idx)
{
    Field f(l);
    f.v[idx] = cplx{1.0 / l.cell_volume(), 0.0};
    return f;
}

Field forward_derivative(const Field& f, int nu)
{
    const auto& dims = f.lat.dims();
    const double inv_eps = 1.0 / f.lat.spacing(nu);
    Field g(f.lat);
    // strides of the row-major layout, time slowest
    std::int64_t stride[4];
    stride[3] = 1;
    stride[2] = dims[3];
    stride[1] = dims[2] * dims[3];
    stride[0] = dims[1] * dims[2] * dims[3];
    const std::int64_t n = f.size();
    for (std::int64_t i = 0; i < n; ++i) {
        const std::int64_t c = (i / stride[nu]) % dims[nu];
        const std::int64_t up =
            (c + 1 == dims[nu]) ? i - (dims[nu] - 1) * stride[nu] : i + stride[nu];
        g.v[i] = inv_eps * (f.v[up] - f.v[i]);
    }
    return g;
}

ExtendedField extend(const Field& f)
{
    return {f,
            {forward_derivative(f, 0), forward_derivative(f, 1),
             forward_derivative(f, 2), forward_derivative(f, 3)}};
}

namespace {

double scale_multiplier(std::int64_t L, ScaleMode mode)
{
    const double dl = static_cast<double>(L);
    switch (mode) {
    case ScaleMode::plain: return std::pow(dl, 1.5);
    case ScaleMode::time_deriv: return std::pow(dl, 3.5);
    case ScaleMode::space_deriv: return std::pow(dl, 2.5);
    }
    return 1.0;
}

} // namespace

Field scale_up(const Field& f, ScaleMode mode)
{
    Field g(finer_relabel(f.lat), f.v);
    g *= scale_multiplier(f.lat.spec().L, mode);
    return g;
}

Field scale_down(const Field& f, ScaleMode mode)
{
    Field g(coarser_relabel(f.lat), f.v);
    g *= 1.0 / scale_multiplier(f.lat.spec().L, mode);
    return g;
}

Field scale_up_n(Field f, int steps)
{
    for (int i = 0; i < steps; ++i)
        f = scale_up(f);
    return f;
}

Field scale_down_n(Field f, int steps)
{
    for (int i = 0; i < steps; ++i)
        f = scale_down(f);
    return f;
}

Field relabel_coarser(const Field& f) { return Field(coarser_relabel(f.lat), f.v); }
Field relabel_finer(const Field& f) { return Field(finer_relabel(f.lat), f.v); }

CutoffParams default_cutoff(double eps, double theta, double v, double mu)
{
    // e_r slightly above 0, e_R slightly below 1/3, e_RP = 1/2; satisfies
    // 3 e_R + 4 e_r < 1 and 1 <= 4 e_R + 2 e_r for small eps.
    return {1.0 / 3.0 - eps, eps / 4.0, 0.5, theta, v, mu};
}

bool chi0_cutoff(const Field& psi, const CutoffParams& p)
{
    const double pref = std::exp(p.theta * p.mu / 2.0);
    const double inv_tv = 1.0 / (p.theta * p.v);
    const double amp_bound = pref * std::pow(inv_tv, p.e_R + p.e_r);
    const double sp_bound =
        pref * std::pow(1.0 / p.theta, p.e_RP) * std::pow(inv_tv, p.e_r);
    const double t_bound = pref * std::pow(inv_tv, p.e_r);

    if (psi.sup() > amp_bound)
        return false;
    if (forward_derivative(psi, 0).sup() > t_bound)
        return false;
    for (int nu = 1; nu < 4; ++nu)
        if (forward_derivative(psi, nu).sup() > sp_bound)
            return false;
    return true;
}

} // namespace pflow
