#include "pflow/typed_poly.hpp"

#include <cmath>

#include "pflow/norms.hpp"
#include "pflow/quartic.hpp"

namespace pflow {

TypeVector Monomial::type() const
{
    TypeVector t;
    for (const auto& s : slots) {
        if (s.comp < 0)
            ++t.p_u;
        else if (s.comp == 0)
            ++t.p_0;
        else
            ++t.p_sp;
    }
    return t;
}

bool TypedPolynomial::empty() const
{
    for (const auto& m : monos)
        if (!m.entries.empty())
            return false;
    return true;
}

cplx eval_poly(const TypedPolynomial& P, const ExtendedField& as,
               const ExtendedField& a)
{
    if (P.monos.empty())
        return {};
    const Lattice& l = P.lat;
    auto comp_field = [&](const MonomialSlot& s) -> const Field& {
        const ExtendedField& e = s.starred ? as : a;
        return s.comp < 0 ? e.base : e.deriv[s.comp];
    };
    cplx total{};
    std::vector<cplx> prod(l.num_points());
    const auto& k = simd::active();
    for (const auto& mono : P.monos) {
        const int p = static_cast<int>(mono.slots.size());
        const double volw = std::pow(l.cell_volume(), p);
        for (const auto& [offs, v] : mono.entries) {
            const Field& f0 = comp_field(mono.slots[0]);
            std::copy(f0.v.begin(), f0.v.end(), prod.begin());
            for (int s = 1; s < p; ++s) {
                const Field shifted = roll(comp_field(mono.slots[s]), offs[s - 1]);
                k.cmul(prod.data(), prod.data(), shifted.v.data(), prod.size());
            }
            total += v * volw * k.sum(prod.data(), prod.size());
        }
    }
    return total;
}

cplx eval_poly(const TypedPolynomial& P, const Field& as, const Field& a)
{
    return eval_poly(P, extend(as), extend(a));
}

namespace {

TypedPolynomial scale_poly(const TypedPolynomial& P, int dir)
{
    TypedPolynomial out;
    out.lat = dir > 0 ? finer_relabel(P.lat) : coarser_relabel(P.lat);
    out.monos = P.monos;
    const double L = static_cast<double>(P.lat.spec().L);
    for (auto& m : out.monos) {
        const TypeVector t = m.type();
        const double mult =
            std::pow(L, dir * (3.5 * t.p_u + 1.5 * t.p_0 + 2.5 * t.p_sp));
        for (auto& [offs, v] : m.entries)
            v *= mult;
    }
    return out;
}

} // namespace

TypedPolynomial scale_up_poly(const TypedPolynomial& P)
{
    return scale_poly(P, +1);
}

TypedPolynomial scale_down_poly(const TypedPolynomial& P)
{
    return scale_poly(P, -1);
}

double poly_norm(const TypedPolynomial& P, double mass, double kappa_base,
                 double kappa_deriv)
{
    double total = 0.0;
    for (const auto& m : P.monos) {
        const TypeVector t = m.type();
        const int p = t.degree();
        // translation-invariant kernel: the pinned integral is pin-independent
        double s = 0.0;
        std::vector<std::int64_t> pts(p);
        for (const auto& [offs, v] : m.entries) {
            pts[0] = 0;
            for (int i = 1; i < p; ++i)
                pts[i] = P.lat.index_of(
                    {offs[i - 1][0], offs[i - 1][1], offs[i - 1][2], offs[i - 1][3]});
            s += std::abs(v) *
                 std::exp(mass * tree_length(P.lat, std::span(pts.data(), pts.size())));
        }
        total += s * std::pow(P.lat.cell_volume(), p - 1) *
                 std::pow(kappa_base, t.p_u) *
                 std::pow(kappa_deriv, t.p_0 + t.p_sp);
    }
    return total;
}

TypedPolynomial random_poly(const Lattice& l, Rng& rng,
                            std::span<const TypeVector> types, int entries,
                            std::int64_t range, double amplitude)
{
    TypedPolynomial P;
    P.lat = l;
    for (const auto& t : types) {
        Monomial m;
        // particle-number balance: alternate starred / unstarred per kind
        auto push = [&](int count, auto comp_of) {
            for (int i = 0; i < count; ++i)
                m.slots.push_back({i % 2 == 0, comp_of(i)});
        };
        push(t.p_u, [](int) { return -1; });
        push(t.p_0, [](int) { return 0; });
        push(t.p_sp, [&](int i) { return 1 + (i % 3); });
        const int p = t.degree();
        for (int e = 0; e < entries; ++e) {
            std::vector<std::array<std::int64_t, 4>> offs(p - 1);
            for (auto& o : offs)
                for (int ax = 0; ax < 4; ++ax)
                    o[ax] = static_cast<std::int64_t>(rng.next() % (2 * range + 1)) -
                            range;
            m.entries.emplace_back(std::move(offs), amplitude * rng.sym());
        }
        P.monos.push_back(std::move(m));
    }
    return P;
}

} // namespace pflow
