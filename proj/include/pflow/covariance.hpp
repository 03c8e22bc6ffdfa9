#ifndef PFLOW_COVARIANCE_HPP
#define PFLOW_COVARIANCE_HPP

#include <optional>

#include "pflow/kinetic.hpp"

namespace pflow {

// Fluctuation covariance stack on the unit lattice X_0^{(n)}:
//   Delta^{(n)}(mu) = fQ_n - fQ_n Q_n S_n(mu) Q_n^T fQ_n   (n >= 1)
//                   = D_0 - mu                              (n = 0)
//   C^{(n)}(mu)     = (a/L^2 Q^T Q + Delta^{(n)}(mu))^{-1}
//   Dsqrt           = operator square root of C^{(n)}(mu), principal branch,
//                     computed per momentum fold class by dense
//                     eigendecomposition.
// Delta^{(n)} is a pure Fourier multiplier on X_0^{(n)}; C couples momenta
// only within the fold classes of the single averaging step to X_{-1}^{(n+1)}.
class CovarianceOps {
public:
    CovarianceOps(const LatticeSpec& base, int n, double a,
                  const AveragingProfile& prof, const KineticSpec& kin,
                  cplx mu);

    const Lattice& unit() const { return unit_; }
    cplx mu() const { return mu_; }

    const std::vector<cplx>& delta_multiplier() const { return delta_hat_; }
    Field apply_delta(const Field& f) const;

    Field apply_Cinv(const Field& f) const { return cinv_->apply(f); }
    Field apply_C(const Field& f) const { return cinv_->solve(f); }
    Field apply_C_transpose(const Field& f) const
    {
        return cinv_->solve_transpose(f);
    }

    Field apply_sqrt(const Field& f) const;            // D^{(n)} f
    Field apply_sqrt_transpose(const Field& f) const;  // D^{(n)T} f

    cplx log_det_C() const;

    LinOp C_op() const;
    LinOp Cinv_op() const;
    LinOp sqrt_op() const;

private:
    // the square-root blocks need one dense eigendecomposition per momentum
    // fold class; built on first use
    void ensure_sqrt_blocks() const;
    Field apply_blocks(const Field& f,
                       const std::vector<std::vector<cplx>>& blocks) const;

    Lattice unit_, coarse_;
    int n_;
    double a_;
    cplx mu_;
    std::vector<cplx> delta_hat_;
    std::shared_ptr<const ClassStructure> qcs_;
    std::optional<ClassOp> cinv_;
    mutable std::vector<std::vector<cplx>> sqrt_blocks_;
    mutable cplx log_det_C_{};
    mutable bool sqrt_built_ = false;
};

} // namespace pflow

#endif
