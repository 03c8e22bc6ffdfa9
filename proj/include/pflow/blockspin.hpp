#ifndef PFLOW_BLOCKSPIN_HPP
#define PFLOW_BLOCKSPIN_HPP

#include "pflow/linop.hpp"

namespace pflow {

struct SolverError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Averaging profile q: the q_exp-fold self-convolution of the indicator of
// [-(L^2-1)/2,(L^2-1)/2] x [-(L-1)/2,(L-1)/2]^3, normalized to total mass one.
// Separable: q(x) = wt[x0] * ws[x1] * ws[x2] * ws[x3].
struct AveragingProfile {
    int q_exp = 4;
    std::int64_t L = 3;
    std::vector<double> wt; // time axis weights, centered, odd length
    std::vector<double> ws; // spatial axis weights, centered, odd length

    std::int64_t half_time() const { return (static_cast<std::int64_t>(wt.size()) - 1) / 2; }
    std::int64_t half_space() const { return (static_cast<std::int64_t>(ws.size()) - 1) / 2; }
    double at(const std::array<std::int64_t, 4>& x) const;
    double total_mass() const;

    // exact DFT of the periodized profile along one axis at momentum index
    // kappa of an N-site axis: (D_w(2 pi kappa/N)/w)^q_exp with the Dirichlet
    // kernel D_w(k) = sin(wk/2)/sin(k/2)
    double hat_axis(double box_width, std::int64_t kappa, std::int64_t N) const;
    double hat_time(std::int64_t kappa, std::int64_t N) const;
    double hat_space(std::int64_t kappa, std::int64_t N) const;
};

AveragingProfile build_profile(int q_exp, std::int64_t L);

// momentum table of the periodized profile on a lattice's index grid
std::vector<double> profile_hat_table(const AveragingProfile& p, const Lattice& l);

// Single averaging step Q: X_j^{(k)} -> X_{j-1}^{(k+1)}; convolution with q
// followed by subsampling by (L^2, L, L, L). The transpose carries the L^5
// volume ratio.
LinOp avg_op(const AveragingProfile& p, const Lattice& dom);

// Iterated averaging Q_n = (L_*^{-1} Q)^n L_*^n from a fine lattice
// X_j^{(k)} down to X_{j-n}^{(k+n)}.
LinOp avg_chain(const AveragingProfile& p, const Lattice& fine, int steps);

// alpha_n(k): the scalar by which the chain maps the plane wave at fine
// momentum k onto the plane wave at its folded momentum. Separable product of
// per-step axis transforms.
std::vector<double> avg_chain_alpha(const AveragingProfile& p,
                                    const Lattice& fine, int steps);

// fold of fine momentum indices onto the coarse grid after `steps` averaging
// subsamplings: per axis kappa mod coarse_dim
std::array<std::int64_t, 4> chain_coarse_dims(const Lattice& fine, int steps);

// Multiplier table of fQ_n = a (1 + sum_{j=1}^{n-1} L^{-2j} Q_j Q_j^T)^{-1}
// on the unit lattice X_0^{(n)}, computed from a delta column of the inner
// operator. For n = 1 this is the constant a.
std::vector<double> quad_coupling_table(const AveragingProfile& p,
                                        const Lattice& unit, int n, double a);

LinOp real_multiplier_op(const Lattice& l, const std::vector<double>& table);

// ---------------------------------------------------------------------------
// Fourier fold classes. On the index momentum grid of `fine`, the operators
// diag(d) + u c u^T  (c a scalar per class, u real per momentum, d complex per
// momentum) are block diagonal over the classes {k : k mod coarse = kappa}.
// Solves are exact via a Woodbury step; near-singular diagonals are shifted
// and folded into the low-rank correction.
class ClassStructure {
public:
    ClassStructure(const Lattice& fine, const std::array<std::int64_t, 4>& cdims);

    const Lattice& fine() const { return fine_; }
    const std::array<std::int64_t, 4>& coarse_dims() const { return cdims_; }
    std::int64_t num_classes() const { return nclasses_; }
    std::int64_t class_size() const { return csize_; }
    // fine momentum indices of class `c` (coarse row-major order), row-major
    // over the per-axis unfolding offsets
    const std::vector<std::int64_t>& members(std::int64_t c) const
    {
        return members_[c];
    }

private:
    Lattice fine_;
    std::array<std::int64_t, 4> cdims_;
    std::int64_t nclasses_ = 1, csize_ = 1;
    std::vector<std::vector<std::int64_t>> members_;
};

class ClassOp {
public:
    // diag: per fine momentum; u: per fine momentum; coupling: per class
    ClassOp(std::shared_ptr<const ClassStructure> cs, std::vector<cplx> diag,
            std::vector<double> u, std::vector<cplx> coupling);

    Field apply(const Field& f) const;
    Field solve(const Field& rhs, double residual_tol = 1e-11) const;
    // bilinear transposes (flip conjugation in index space)
    Field apply_transpose(const Field& f) const;
    Field solve_transpose(const Field& rhs, double residual_tol = 1e-11) const;

    LinOp as_linop() const;
    LinOp inverse_linop(double residual_tol = 1e-11) const;

    // u^T (diag + u c u^T)^{-1} u per class (used for spectral assembly)
    std::vector<cplx> quadratic_in_inverse() const;

    // diagonal entries of the inverse in the momentum basis, per fine momentum
    std::vector<cplx> inverse_diagonal() const;

    const ClassStructure& classes() const { return *cs_; }
    const std::vector<cplx>& diag() const { return diag_; }
    const std::vector<double>& u() const { return u_; }
    const std::vector<cplx>& coupling() const { return coupling_; }

private:
    void solve_class(std::int64_t c, std::vector<cplx>& io) const;

    std::shared_ptr<const ClassStructure> cs_;
    std::vector<cplx> diag_;
    std::vector<double> u_;
    std::vector<cplx> coupling_;
};

} // namespace pflow

#endif
