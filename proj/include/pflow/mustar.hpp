#ifndef PFLOW_MUSTAR_HPP
#define PFLOW_MUSTAR_HPP

#include "pflow/quartic.hpp"

namespace pflow {

// Critical chemical potential: the lattice-sum definition
//   mu_* = 2 int dx1 dx2 dx3 V_0(0, x1, x2, x3) D_0^{-1}(x3, 0)
// with D_0^{-1} on the infinite spatial lattice, and its Bose-integral form
//   mu_* = 2 theta int_{BZ} d^3k/(2pi)^3 (vhat(0) + vhat(k)) / (e^{beta hhat(k)} - 1),
// exact for the pure time-convolved kernel. beta = Ltp * theta.
struct MuStarConfig {
    KineticSpec kin;          // theta and the spatial multiplier
    SpatialKernel v;          // two-body kernel
    std::int64_t Ltp = 8;     // temporal extent (beta in theta units)
    std::int64_t Ns0 = 64;    // base of the spatial-size ladder
    int ladder = 3;           // sizes Ns0, 2 Ns0, 4 Ns0, ...
    double quad_rel_tol = 1e-10;
};

struct MuStarLattice {
    double value = 0.0;      // Richardson-extrapolated
    double error_est = 0.0;
    std::vector<double> ladder_values;
    bool converged = true;   // extrapolation residuals decreasing
};

// pure time-convolved kernel, contracted through heat kernels (any torus size)
MuStarLattice mustar_lattice(const MuStarConfig& cfg);

// explicit four-point kernel on a given torus: direct contraction against the
// zero-mode-excluded D_0^{-1} column (single size, no extrapolation)
double mustar_lattice_kernel(const MuStarConfig& cfg, const Lattice& l,
                             const QuarticKernel& V0);

// adaptive Brillouin-zone quadrature with dyadic refinement toward k = 0
double mustar_fourier(const MuStarConfig& cfg);

// Generic adaptive cube quadrature used by mustar_fourier; integrates f over
// [-pi,pi]^3 with geometric refinement toward the (integrable) singularity at
// the origin. `sing_coeff` bounds the remaining inner-cube mass:
// int_{[-h,h]^3} |f| <= sing_coeff * h; refinement continues until that bound
// drops below the tolerance.
double bz_integrate(const std::function<double(double, double, double)>& f,
                    double rel_tol, double sing_coeff, int max_levels = 64);

// (1/p) sum_k zeta^k / (1 - w zeta^k) for the primitive p-th root zeta, and
// the closed form w^{p-1}/(1 - w^p); throws on w^p = 1
struct RootSum {
    cplx direct, closed;
    double rel_gap;
};
RootSum primitive_root_sum(int p, cplx w);

} // namespace pflow

#endif
