#ifndef PFLOW_SYMMETRY_HPP
#define PFLOW_SYMMETRY_HPP

#include "pflow/linop.hpp"
#include "pflow/typed_poly.hpp"

namespace pflow {

// Lattice symmetry group: translations by unit-lattice vectors and the four
// reflections, in the normal form g = T_x prod R_nu. The point action is
// u -> x + R u. Reflections act on derivative components with the shifted
// sign rule
//   (R_nu alpha_nu)(u) = -alpha_nu(R_nu u - eps_{j,nu} e_nu),
// other components transform by plain point pull-back. The time reflection
// acts on functionals with conjugation and a star swap.
struct GroupElement {
    std::array<std::int64_t, 4> tr{}; // unit-lattice coordinates
    std::array<bool, 4> refl{};

    static GroupElement translation(const std::array<std::int64_t, 4>& x);
    static GroupElement reflection(int nu);
    friend bool operator==(const GroupElement&, const GroupElement&) = default;
};

GroupElement compose(const GroupElement& a, const GroupElement& b); // a after b
GroupElement inverse(const GroupElement& g);
bool has_time_reflection(const GroupElement& g);

// point action on the enumeration index of a lattice with scale index j >= 0
std::int64_t act_point(const GroupElement& g, const Lattice& l, std::int64_t u);

Field act_field(const GroupElement& g, const Field& f); // (g a)(u) = a(g^{-1} u)
ExtendedField act_extended(const GroupElement& g, const ExtendedField& e);

// functional of a pair of extended fields
using PairFunctional =
    std::function<cplx(const ExtendedField&, const ExtendedField&)>;

// (g F)(a_*, a): pull-back for spatial g; for g containing the time
// reflection, conj(F(g'^{-1} a^*, g'^{-1} a_*^*))
cplx eval_transformed(const GroupElement& g, const PairFunctional& F,
                      const ExtendedField& as, const ExtendedField& a);

// max_g max_samples |(g F)(a_*, a) - F(a_*, a)| / scale over the generators
// and a fixed set of random products
double invariance_residual(const PairFunctional& F, const Lattice& l, Rng& rng,
                           int samples = 4, double amplitude = 1.0);

// F(e^{-i t} a_*, e^{i t} a) = F(a_*, a) over a van der Corput phase set
bool particle_number_check(const PairFunctional& F, const Lattice& l, Rng& rng,
                           int phases = 16, double rel_tol = 1e-12);

// kernel transform of a translation-invariant monomial under a spatial
// reflection or the point-part of the time reflection (signs and shifts on
// derivative slots; the star swap does not move kernels)
Monomial act_on_monomial(const GroupElement& g, const Monomial& m,
                         const Lattice& l);
TypedPolynomial act_on_poly(const GroupElement& g, const TypedPolynomial& P);

// functional views
PairFunctional poly_functional(const TypedPolynomial& P);
PairFunctional bilinear_functional(const LinOp& A); // <a_*, A a>

} // namespace pflow

#endif
