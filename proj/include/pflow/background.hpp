#ifndef PFLOW_BACKGROUND_HPP
#define PFLOW_BACKGROUND_HPP

#include "pflow/covariance.hpp"
#include "pflow/quartic.hpp"

namespace pflow {

// Operator bundle of one scale m: everything needed to pose and solve the
// stationarity equations of the dominant action A_m,
//   S_m^{*-1}(mu) phi_* + V'_*(phi_*, phi, phi_*) = Q_m^T fQ_m psi_*
//   S_m^{-1}(mu)  phi   + V'(phi, phi_*, phi)     = Q_m^T fQ_m psi.
// For m = 0 only the lattices, D_0 and (mu, V) are populated.
struct BgCtx {
    LatticeSpec base;
    int m = 0;
    double a = 1.0;
    cplx mu{};
    QuarticKernel V; // on X_m (on X_0 when m = 0)
    AveragingProfile prof;
    KineticSpec kin;

    Lattice X0; // X_0^{(m)}
    Lattice Xf; // X_m
    LinOp Qm;   // X_m -> X_0^{(m)}   (identity for m = 0)
    std::vector<double> fQ;
    LinOp fQ_op;
    LinOp Dm;
    std::shared_ptr<GreensOp> S;  // S_m(mu)
    std::shared_ptr<GreensOp> S0; // S_m(0)
};

BgCtx make_bg_ctx(const LatticeSpec& base, int m, double a, cplx mu,
                  QuarticKernel V, const AveragingProfile& prof,
                  const KineticSpec& kin);

struct BackgroundSolution {
    Field phis, phi;
    double residual_star = 0.0, residual = 0.0; // sup-norm of the two equations
    int iterations = 0;
    double contraction = 0.0; // measured ratio of successive changes
    bool radius_warning = false;
};

struct BackgroundOptions {
    double change_tol = 1e-12;
    int max_iterations = 200;
    double radius = 0.0; // small-field radius kappa(m); 0 disables the check
    const BackgroundSolution* warm_start = nullptr;
};

// Picard iteration phi^{k+1} = S^{(*)}(mu) [Q^T fQ psi - gradient(phi^k)]
// from the linear iterate; throws SolverError on measured divergence
// (5 consecutive growing steps).
BackgroundSolution solve_background(const BgCtx& c, const Field& psis,
                                    const Field& psi,
                                    const BackgroundOptions& opt = {});

// sup-norm residuals of the two stationarity equations at given fields
std::pair<double, double> background_residual(const BgCtx& c, const Field& psis,
                                              const Field& psi,
                                              const Field& phis,
                                              const Field& phi);

} // namespace pflow

#endif
