#ifndef PFLOW_ACTION_HPP
#define PFLOW_ACTION_HPP

#include "pflow/background.hpp"
#include "pflow/typed_poly.hpp"

namespace pflow {

struct IdentityError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// One block-spin step at scale n: the dominant action, its scaled form, the
// critical fields, the fluctuation covariance, and the exponent assembly.
// Holds the scale-n background bundle (n >= 1) and the scale-(n+1) bundle for
// (L^2 mu, S V).
struct StepCtx {
    LatticeSpec base;
    int n = 0;
    double a = 1.0;
    cplx mu{};

    std::shared_ptr<BgCtx> bg;   // scale n with (mu, V); lattices only for n=0
    std::shared_ptr<BgCtx> bg1;  // scale n+1 with (L^2 mu, S V)

    Lattice Xm1; // X_{-1}^{(n+1)}, carrier of theta
    Lattice X1n; // X_1^{(n)}, carrier of the scaled fluctuation variable z
    LinOp Q;     // X_0^{(n)} -> X_{-1}^{(n+1)}

    std::shared_ptr<ClassOp> crit_inv;     // ((a/L^2) Q^T Q + fQ_n)^{-1}, n >= 1
    std::shared_ptr<CovarianceOps> cov0;   // C^{(n)}, D^{(n)} at mu = 0

    int gl_order = 8; // t-quadrature order for the remainder integrals

    const Lattice& X0n() const { return bg->X0; }
    const Lattice& Xn() const { return bg->Xf; }
};

StepCtx make_step_ctx(const LatticeSpec& base, int n, double a, cplx mu,
                      const QuarticKernel& V, const AveragingProfile& prof,
                      const KineticSpec& kin);

// A_n(psi_*, psi, phi_*, phi) = <psi_* - Q_n phi_*, fQ_n (psi - Q_n phi)>_0
//   + <phi_*, D_n phi>_n + V(phi_*, phi) - mu <phi_*, phi>_n      (n >= 1)
cplx eval_action(const BgCtx& c, const Field& psis, const Field& psi,
                 const Field& phis, const Field& phi);
// A_0(psi_*, psi) = <psi_*, D_0 psi>_0 + V(psi_*, psi) - mu <psi_*, psi>_0
cplx eval_action0(const BgCtx& c, const Field& psis, const Field& psi);

// Acheck_{n+1}(theta_*, theta, phck_*, phck) for theta on X_{-1}^{(n+1)} and
// phck on X_n, evaluated BOTH through the definition (scale everything up and
// use A_{n+1}) and through the closed form
//   <theta_* - Q Q_n phck_*, fQcheck_{n+1} (theta - Q Q_n phck)>_{-1}
//     + <phck_*, D_n phck>_n + V(phck_*, phck) - mu <phck_*, phck>_n.
// Returns the closed-form value; a relative discrepancy above `trip` throws
// IdentityError.
struct ACheckResult {
    cplx value;
    double discrepancy;
};
ACheckResult eval_action_check(const StepCtx& s, const Field& thetas,
                               const Field& theta, const Field& phcks,
                               const Field& phck, double trip = 1e-9);

// critical fields psi_{(*)n}(theta_*, theta):
//   ((a/L^2) Q^T Q + fQ_n)^{-1} { (a/L^2) Q^T theta_{(*)}
//                                  + fQ_n Q_n phck_{(*)n+1} }       (n >= 1)
//   psi_{(*)0} = phck_{1(*)}                                        (n = 0)
struct CriticalFields {
    Field psis, psi;    // on X_0^{(n)}
    Field phcks, phck;  // next-scale background phck_{(*)n+1} on X_n
    BackgroundSolution next; // the underlying scale-(n+1) solve
};
CriticalFields critical_fields(const StepCtx& s, const Field& thetas,
                               const Field& theta);

// scaled background fields phck_{(*)n+1}(theta) = S^{-1}[phi_{(*)n+1}(S theta)]
BackgroundSolution scaled_background(const StepCtx& s, const Field& thetas,
                                     const Field& theta,
                                     const BackgroundOptions& opt = {});

// variation fields (n >= 1):
//   dphck_{(*)} = phi_{(*)n}(psi_n + dpsi) - phi_{(*)n}(psi_n),
//   dplus_{(*)} = dphck_{(*)} - S_n^{(*)}(0) Q_n^T fQ_n dpsi_{(*)}
struct DeltaPhi {
    Field dphcks, dphck;
    Field dpluss, dplus;
    BackgroundSolution base, shifted; // the two scale-n solves
};
DeltaPhi delta_phi(const StepCtx& s, const CriticalFields& cf,
                   const Field& dpsis, const Field& dpsi);

// residual of the fixed-point characterization of the variation fields:
// dphck = S(mu) Q^T fQ dpsi - S(mu)[grad V(shifted) - grad V(base)],
// sup-norm of both equations
std::pair<double, double> delta_phi_residual(const StepCtx& s,
                                             const CriticalFields& cf,
                                             const DeltaPhi& d,
                                             const Field& dpsis,
                                             const Field& dpsi);

// delta Acheck_n(theta, dpsi): the t-integral remainder of the one-step
// exponent (Gauss-Legendre of order s.gl_order for n >= 1; the n = 0 form is
// expanded exactly in powers of t)
cplx delta_A_check(const StepCtx& s, const CriticalFields& cf,
                   const Field& dpsis, const Field& dpsi);

// scaled-variable wrappers entering the recursion in the next-scale variables
struct HatFields {
    Field hat_psis, hat_psi;   // on X_1^{(n)}
    Field dhat_phis, dhat_phi; // on X_{n+1}
    Field dhat_pluss, dhat_plus;
};
HatFields hat_variants(const StepCtx& s, const Field& psis, const Field& psi,
                       const Field& zs, const Field& z);

// Exponent split: the difference of the full exponent at the shifted and
// base fields equals <dpsi_*, C^{(n)-1} dpsi>_0 + delta Acheck_n
struct ExponentSplit {
    cplx lhs, gauss, dA;
    double residual; // relative
};
ExponentSplit exponent_split(const StepCtx& s, const Field& thetas,
                             const Field& theta, const Field& dpsis,
                             const Field& dpsi);

// Full one-step exponent assembly at given fields, with the scaled (hatted)
// forms and their agreement residuals. R on X_n (empty allowed), E on
// X_0^{(n)}; zeta on X_0^{(n)}, z = relabel of zeta on X_1^{(n)}.
struct StepExponents {
    cplx C_check, dA_check, dR_check, dE_check; // unscaled forms at theta
    cplx C_scaled, dA_scaled, dR_scaled, dE_scaled; // forms at psi = S theta
    double resid_C, resid_A, resid_R, resid_E;
    cplx gauss_diag;     // <dpsi_*, C^{-1} dpsi>_0, equals <zeta_*, zeta>_0
    double resid_gauss;
    double log_NT, log_NS; // log N_T^{(n)}, log N_S
    cplx log_NT_tilde;     // log N_T^{(n)} - log det C^{(n)}
};
StepExponents assemble_step_exponents(const StepCtx& s, const Field& thetas,
                                      const Field& theta, const Field& zetas,
                                      const Field& zeta,
                                      const TypedPolynomial& R,
                                      const TypedPolynomial& E,
                                      double trip = 1e-9);

// Gauss-Legendre nodes/weights on [0,1]
struct Quadrature {
    std::vector<double> node, weight;
};
Quadrature gauss_legendre_01(int order);

} // namespace pflow

#endif
