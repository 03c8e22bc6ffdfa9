#ifndef PFLOW_TYPED_POLY_HPP
#define PFLOW_TYPED_POLY_HPP

#include <span>

#include "pflow/field.hpp"

namespace pflow {

// Monomials in a pair of extended fields (a_*, {a_{*nu}}), (a, {a_nu}).
// Each slot selects starred/unstarred and a component (-1 = undifferentiated
// base field, 0..3 = forward-derivative component). Kernels are translation
// invariant and stored by the offsets of slots 2..p relative to slot 1.
struct MonomialSlot {
    bool starred = false;
    int comp = -1;
};

struct TypeVector {
    int p_u = 0, p_0 = 0, p_sp = 0;
    int degree() const { return p_u + p_0 + p_sp; }
    // scaling dimension (3/2) p_u + (7/2) p_0 + (5/2) p_sp
    double delta() const { return 1.5 * p_u + 3.5 * p_0 + 2.5 * p_sp; }
    friend bool operator==(const TypeVector&, const TypeVector&) = default;
};

struct Monomial {
    std::vector<MonomialSlot> slots;
    // (offsets of slots 2..p relative to slot 1, coefficient)
    std::vector<std::pair<std::vector<std::array<std::int64_t, 4>>, double>>
        entries;

    TypeVector type() const;
};

struct TypedPolynomial {
    Lattice lat;
    std::vector<Monomial> monos;

    bool empty() const;
};

cplx eval_poly(const TypedPolynomial& P, const ExtendedField& as,
               const ExtendedField& a);
// convenience: extend the bases and evaluate
cplx eval_poly(const TypedPolynomial& P, const Field& as, const Field& a);

// one parabolic scaling step: kernels multiplied by
// L^{(7/2) p_u + (3/2) p_0 + (5/2) p_sp}, lattice relabeled one step finer
TypedPolynomial scale_up_poly(const TypedPolynomial& P);
TypedPolynomial scale_down_poly(const TypedPolynomial& P);

// mass-m norm with weight kappa_base on undifferentiated slots and
// kappa_deriv on derivative slots; with both weights 1 this is ||.||_m
double poly_norm(const TypedPolynomial& P, double mass, double kappa_base,
                 double kappa_deriv);

// a seeded random polynomial with one monomial per type in `types`, entries
// supported on offsets within `range` index steps
TypedPolynomial random_poly(const Lattice& l, Rng& rng,
                            std::span<const TypeVector> types, int entries,
                            std::int64_t range, double amplitude);

} // namespace pflow

#endif
