#include "pflow/symmetry.hpp"

#include <numbers>

namespace pflow {

GroupElement GroupElement::translation(const std::array<std::int64_t, 4>& x)
{
    GroupElement g;
    g.tr = x;
    return g;
}

GroupElement GroupElement::reflection(int nu)
{
    GroupElement g;
    g.refl[nu] = true;
    return g;
}

bool has_time_reflection(const GroupElement& g) { return g.refl[0]; }

GroupElement compose(const GroupElement& a, const GroupElement& b)
{
    // (x, R)(y, S): u -> x + R(y + S u) = (x + R y) + R S u
    GroupElement g;
    for (int ax = 0; ax < 4; ++ax) {
        g.tr[ax] = a.tr[ax] + (a.refl[ax] ? -b.tr[ax] : b.tr[ax]);
        g.refl[ax] = a.refl[ax] != b.refl[ax];
    }
    return g;
}

GroupElement inverse(const GroupElement& g)
{
    // (x, R)^{-1} = (-R x, R)
    GroupElement h;
    for (int ax = 0; ax < 4; ++ax) {
        h.refl[ax] = g.refl[ax];
        h.tr[ax] = g.refl[ax] ? g.tr[ax] : -g.tr[ax];
    }
    return h;
}

namespace {

// translation steps of one unit-lattice vector in index units of l
std::int64_t unit_steps(const Lattice& l, int ax)
{
    const int j = l.spec().j;
    if (j < 0)
        throw ConfigError("symmetry: point action needs scale index >= 0");
    return integer_pow(l.spec().L, ax == 0 ? 2 * j : j);
}

} // namespace

std::int64_t act_point(const GroupElement& g, const Lattice& l, std::int64_t u)
{
    auto c = l.coords_of(u);
    for (int ax = 0; ax < 4; ++ax) {
        if (g.refl[ax])
            c[ax] = -c[ax];
        c[ax] += g.tr[ax] * unit_steps(l, ax);
    }
    return l.index_of(c);
}

Field act_field(const GroupElement& g, const Field& f)
{
    const GroupElement gi = inverse(g);
    Field out(f.lat);
    for (std::int64_t u = 0; u < f.size(); ++u)
        out.v[u] = f.v[act_point(gi, f.lat, u)];
    return out;
}

ExtendedField act_extended(const GroupElement& g, const ExtendedField& e)
{
    ExtendedField out;
    out.base = act_field(g, e.base);
    const GroupElement gi = inverse(g);
    const Lattice& l = e.base.lat;
    for (int nu = 0; nu < 4; ++nu) {
        Field comp(l);
        const double sign = g.refl[nu] ? -1.0 : 1.0;
        for (std::int64_t u = 0; u < comp.size(); ++u) {
            // (g a_nu)(u) = sign * a_nu(R(u - x) - [refl nu] e_nu)
            auto c = l.coords_of(act_point(gi, l, u));
            if (g.refl[nu])
                c[nu] -= 1;
            comp.v[u] = sign * e.deriv[nu].v[l.index_of(c)];
        }
        out.deriv[nu] = comp;
    }
    return out;
}

namespace {

ExtendedField conj_extended(const ExtendedField& e)
{
    ExtendedField out;
    out.base = conj(e.base);
    for (int nu = 0; nu < 4; ++nu)
        out.deriv[nu] = conj(e.deriv[nu]);
    return out;
}

} // namespace

cplx eval_transformed(const GroupElement& g, const PairFunctional& F,
                      const ExtendedField& as, const ExtendedField& a)
{
    if (!has_time_reflection(g)) {
        const GroupElement gi = inverse(g);
        return F(act_extended(gi, as), act_extended(gi, a));
    }
    // g = g' R_0 with g' spatial:
    // (g F)(a_*, a) = (g' (R_0 F))(a_*, a) and
    // (R_0 F)(a_*, a) = conj(F(R_0^{-1} a^*, R_0^{-1} a_*^*))
    GroupElement gp = g;
    gp.refl[0] = false;
    GroupElement r0 = GroupElement::reflection(0);
    // time translations commute with R_0 up to sign; keep the translation in
    // the spatial part and fold the sign into r0's inverse action
    const GroupElement gpi = inverse(gp);
    const ExtendedField asp = act_extended(gpi, as);
    const ExtendedField ap = act_extended(gpi, a);
    const GroupElement r0i = inverse(r0);
    return std::conj(F(act_extended(r0i, conj_extended(ap)),
                       act_extended(r0i, conj_extended(asp))));
}

double invariance_residual(const PairFunctional& F, const Lattice& l, Rng& rng,
                           int samples, double amplitude)
{
    std::vector<GroupElement> gens;
    gens.push_back(GroupElement::translation({1, 0, 0, 0}));
    gens.push_back(GroupElement::translation({0, 1, 0, 0}));
    for (int nu = 0; nu < 4; ++nu)
        gens.push_back(GroupElement::reflection(nu));
    // a couple of products
    gens.push_back(compose(gens[2], gens[4]));
    gens.push_back(compose(gens[0], compose(gens[3], gens[5])));

    double worst = 0.0;
    for (int s = 0; s < samples; ++s) {
        const ExtendedField as = extend(random_field(l, rng, amplitude));
        const ExtendedField a = extend(random_field(l, rng, amplitude));
        const cplx base = F(as, a);
        const double scale = std::max(std::abs(base), 1e-300);
        for (const auto& g : gens) {
            const cplx t = eval_transformed(g, F, as, a);
            worst = std::max(worst, std::abs(t - base) / scale);
        }
    }
    return worst;
}

bool particle_number_check(const PairFunctional& F, const Lattice& l, Rng& rng,
                           int phases, double rel_tol)
{
    const ExtendedField as = extend(random_field(l, rng));
    const ExtendedField a = extend(random_field(l, rng));
    const cplx base = F(as, a);
    const double scale = std::max(std::abs(base), 1.0);

    auto rotate = [&](const ExtendedField& e, cplx ph) {
        ExtendedField out;
        out.base = ph * e.base;
        for (int nu = 0; nu < 4; ++nu)
            out.deriv[nu] = ph * e.deriv[nu];
        return out;
    };
    for (int i = 1; i <= phases; ++i) {
        // van der Corput base-2 phase set
        double x = 0.0, w = 0.5;
        for (int b = i; b > 0; b >>= 1, w *= 0.5)
            if (b & 1)
                x += w;
        const double th = 2.0 * std::numbers::pi * x;
        const cplx ph = std::exp(cplx{0.0, th});
        const cplx rot = F(rotate(as, std::conj(ph)), rotate(a, ph));
        if (std::abs(rot - base) > rel_tol * scale)
            return false;
    }
    return true;
}

Monomial act_on_monomial(const GroupElement& g, const Monomial& m,
                         const Lattice& l)
{
    // translations leave translation-invariant kernels unchanged; reflections
    // transform offsets as R o - (s_l - s_1) with the slot shifts s of the
    // derivative rule, and flip the sign once per reflected derivative slot
    Monomial out;
    out.slots = m.slots;
    const int p = static_cast<int>(m.slots.size());

    auto slot_shift = [&](int slot) {
        std::array<std::int64_t, 4> s{};
        const int comp = m.slots[slot].comp;
        if (comp >= 0 && g.refl[comp])
            s[comp] = 1;
        return s;
    };
    double sign = 1.0;
    for (int slot = 0; slot < p; ++slot) {
        const int comp = m.slots[slot].comp;
        if (comp >= 0 && g.refl[comp])
            sign = -sign;
    }

    const auto s1 = slot_shift(0);
    for (const auto& [offs, v] : m.entries) {
        std::vector<std::array<std::int64_t, 4>> noffs(p - 1);
        for (int slot = 1; slot < p; ++slot) {
            const auto sl = slot_shift(slot);
            for (int ax = 0; ax < 4; ++ax) {
                std::int64_t o = offs[slot - 1][ax];
                if (g.refl[ax])
                    o = -o;
                noffs[slot - 1][ax] =
                    Lattice::mod(o - (sl[ax] - s1[ax]), l.dims()[ax]);
            }
        }
        out.entries.emplace_back(std::move(noffs), sign * v);
    }
    return out;
}

TypedPolynomial act_on_poly(const GroupElement& g, const TypedPolynomial& P)
{
    TypedPolynomial out;
    out.lat = P.lat;
    for (const auto& m : P.monos)
        out.monos.push_back(act_on_monomial(g, m, P.lat));
    return out;
}

PairFunctional poly_functional(const TypedPolynomial& P)
{
    return [P](const ExtendedField& as, const ExtendedField& a) {
        return eval_poly(P, as, a);
    };
}

PairFunctional bilinear_functional(const LinOp& A)
{
    return [A](const ExtendedField& as, const ExtendedField& a) {
        return inner(as.base, A.apply(a.base));
    };
}

} // namespace pflow
