#ifndef PFLOW_QUARTIC_HPP
#define PFLOW_QUARTIC_HPP

#include <map>

#include "pflow/kinetic.hpp"

namespace pflow {

// Translation-invariant two-body spatial kernel v(x,y) = v(x-y), stored by
// offset. Must be even and define a strictly positive operator for the
// configurations used here (checked by vhat_min).
struct SpatialKernel {
    std::map<std::array<std::int64_t, 3>, double> m;

    void add(const std::array<std::int64_t, 3>& off, double v);
    static SpatialKernel onsite(double v0);
    static SpatialKernel nearest_neighbor(double v0, double v1);

    // vhat(k) = sum_d v(d) cos(k.d), tabulated on an Ns^3 momentum grid
    std::vector<double> hat_table(std::int64_t Ns) const;
    double hat_at(const std::array<double, 3>& k) const; // k in radians
    double hat_zero() const;                             // sum of all entries
};

// Four-point interaction kernel V(u1,u2,u3,u4), translation invariant,
// stored by the offsets of u2,u3,u4 relative to u1 and kept exactly
// symmetric under u1<->u3 and u2<->u4 (symmetrization at insertion).
class QuarticKernel {
public:
    using Offsets = std::array<std::array<std::int64_t, 4>, 3>; // o2,o3,o4

    QuarticKernel() = default;
    explicit QuarticKernel(const Lattice& l) : lat_(l) {}

    const Lattice& lattice() const { return lat_; }
    std::size_t num_entries() const { return m_.size(); }
    const std::map<std::array<std::int64_t, 12>, double>& entries() const
    {
        return m_;
    }

    // adds v/4 at each image of the symmetrization orbit
    void add_symmetrized(const Offsets& off, double v);
    double at(const Offsets& off) const;

    // V_n^{(u)}: offsets carried over to the relabeled lattice, values
    // multiplied by L^{14 per step}
    QuarticKernel rescaled(int steps) const;
    // kernel of S V (one scaling step towards finer j), multiplier L^{14}
    QuarticKernel scaled_once_up() const { return rescaled(1); }

    // sum over the three free arguments with the first pinned, times vol^3
    double average_rv() const;

    friend class Quartic;

private:
    Lattice lat_;
    std::map<std::array<std::int64_t, 12>, double> m_;
};

// Evaluation facade: 1/2-weighted quadruple sums with vol^4 measure, and the
// contracted gradients used by the stationarity equations.
namespace quartic {

// (1/2) int du1..du4 V phi*(u1) phi(u2) phi*(u3) phi(u4)
cplx eval(const QuarticKernel& V, const Field& phis, const Field& phi);
// same with four independent argument fields
cplx eval_mixed(const QuarticKernel& V, const Field& a1, const Field& a2,
                const Field& a3, const Field& a4);

// V'_*(u; z1, z, z2) = int du1 du2 du3 M(u1,u2,u3,u) z1(u1) z(u2) z2(u3)
Field grad_star(const QuarticKernel& V, const Field& z1, const Field& z,
                const Field& z2);
// V'(u; z1, z*, z2) = int du2 du3 du4 M(u,u2,u3,u4) z1(u2) z*(u3) z2(u4)
Field grad(const QuarticKernel& V, const Field& z1, const Field& zs,
           const Field& z2);

// gradient of eval with respect to phi (equals V'_*(phi*, ., phi*) contracted)
// and phi*, for finite-difference checks
Field grad_wrt_phi(const QuarticKernel& V, const Field& phis, const Field& phi);
Field grad_wrt_phis(const QuarticKernel& V, const Field& phis, const Field& phi);

} // namespace quartic

// periodic shift of a field by an index offset: g(x) = f(x + off)
Field roll(const Field& f, const std::array<std::int64_t, 4>& off);

// The ultraviolet-derived quartic kernel
//   v_theta(x1..x4) = sum_{x,y} int_0^theta dt
//        H_t(x-x1) H_{theta-t}(x-x2) v(x-y) H_t(y-x3) H_{theta-t}(y-x4)
//      + (x1 <-> x3 in the first factor pair)
// carried on the lattice with the temporal delta structure
// d_{t1,t3} d_{t2,t4} d_{t1,t2-1}. The t-integral is a composite trapezoid
// with `steps` panels; heat kernels are spatial FFTs. Intended for small
// spatial tori (cost grows like Ns^12).
QuarticKernel build_vtheta(const Lattice& l, const SpatialKernel& v,
                           const KineticSpec& kin, int steps);

// on-site repulsion lambda at zero offsets, plus optional nearest-neighbor tail
QuarticKernel onsite_quartic(const Lattice& l, double lambda,
                             double nn_tail = 0.0);

} // namespace pflow

#endif
