#include "pflow/covariance.hpp"

#include <Eigen/Dense>

namespace pflow {

CovarianceOps::CovarianceOps(const LatticeSpec& base, int n, double a,
                             const AveragingProfile& prof,
                             const KineticSpec& kin, cplx mu)
    : n_(n), a_(a), mu_(mu)
{
    const ScaleGeometry g = scale_geometry(base, n);
    unit_ = g.X0n;
    coarse_ = g.Xm1;

    if (n == 0) {
        delta_hat_ = kinetic_multiplier(unit_, kin, 0);
        for (auto& d : delta_hat_)
            d -= mu;
    } else {
        const GreensOp greens(g.Xn, unit_, prof, kin, n, a, mu);
        const std::vector<double> fq = quad_coupling_table(prof, unit_, n, a);
        const std::vector<cplx> quad = greens.class_op().quadratic_in_inverse();
        delta_hat_.resize(unit_.num_points());
        for (std::int64_t k = 0; k < unit_.num_points(); ++k)
            delta_hat_[k] = fq[k] - fq[k] * fq[k] * quad[k];
    }

    qcs_ = std::make_shared<ClassStructure>(unit_, chain_coarse_dims(unit_, 1));
    std::vector<double> qhat = profile_hat_table(prof, unit_);
    const double c = a / static_cast<double>(base.L * base.L);
    std::vector<cplx> coupling(qcs_->num_classes(), cplx{c, 0.0});
    cinv_.emplace(qcs_, delta_hat_, std::move(qhat), std::move(coupling));
}

Field CovarianceOps::apply_delta(const Field& f) const
{
    return apply_multiplier(unit_, delta_hat_, f);
}

cplx CovarianceOps::log_det_C() const
{
    ensure_sqrt_blocks();
    return log_det_C_;
}

void CovarianceOps::ensure_sqrt_blocks() const
{
    if (sqrt_built_)
        return;
    sqrt_built_ = true;
    using Mat = Eigen::MatrixXcd;
    const std::int64_t m = qcs_->class_size();
    sqrt_blocks_.assign(qcs_->num_classes(), {});
    log_det_C_ = cplx{};

    for (std::int64_t c = 0; c < qcs_->num_classes(); ++c) {
        const auto& mem = qcs_->members(c);
        Mat cinv(m, m);
        const cplx coup = cinv_->coupling()[c];
        for (std::int64_t i = 0; i < m; ++i)
            for (std::int64_t j = 0; j < m; ++j) {
                cplx v = coup * cinv_->u()[mem[i]] * cinv_->u()[mem[j]];
                if (i == j)
                    v += cinv_->diag()[mem[i]];
                cinv(i, j) = v;
            }

        // principal square root of C_class = cinv^{-1} through the Schur
        // form: stable under the repeated eigenvalues of these
        // diagonal-plus-rank-one blocks
        Eigen::ComplexSchur<Mat> schur(cinv);
        if (schur.info() != Eigen::Success)
            throw SolverError("covariance: Schur decomposition failed");
        Mat t = schur.matrixT();
        const Mat& uq = schur.matrixU();
        for (std::int64_t i = 0; i < m; ++i) {
            if (t(i, i).real() <= 0.0)
                throw SolverError(
                    "covariance: square-root branch error, eigenvalue with "
                    "nonpositive real part");
            log_det_C_ -= std::log(t(i, i));
        }
        // triangular inverse, then its square root (Bjorck-Hammarling)
        const Mat tinv =
            t.triangularView<Eigen::Upper>().solve(Mat::Identity(m, m));
        Mat r = Mat::Zero(m, m);
        for (std::int64_t i = 0; i < m; ++i)
            r(i, i) = std::sqrt(tinv(i, i));
        for (std::int64_t dpos = 1; dpos < m; ++dpos)
            for (std::int64_t i = 0; i + dpos < m; ++i) {
                const std::int64_t j = i + dpos;
                cplx sum = tinv(i, j);
                for (std::int64_t k = i + 1; k < j; ++k)
                    sum -= r(i, k) * r(k, j);
                r(i, j) = sum / (r(i, i) + r(j, j));
            }
        const Mat d = uq * r * uq.adjoint();
        auto& blk = sqrt_blocks_[c];
        blk.resize(m * m);
        for (std::int64_t i = 0; i < m; ++i)
            for (std::int64_t j = 0; j < m; ++j)
                blk[i * m + j] = d(i, j);
    }
}

Field CovarianceOps::apply_blocks(const Field& f,
                                  const std::vector<std::vector<cplx>>& blocks) const
{
    Field g = f;
    fft4(unit_.dims(), g.v, false);
    const std::int64_t m = qcs_->class_size();
    std::vector<cplx> in(m), out(m);
    for (std::int64_t c = 0; c < qcs_->num_classes(); ++c) {
        const auto& mem = qcs_->members(c);
        const auto& blk = blocks[c];
        for (std::int64_t i = 0; i < m; ++i)
            in[i] = g.v[mem[i]];
        for (std::int64_t i = 0; i < m; ++i) {
            cplx s{};
            for (std::int64_t j = 0; j < m; ++j)
                s += blk[i * m + j] * in[j];
            out[i] = s;
        }
        for (std::int64_t i = 0; i < m; ++i)
            g.v[mem[i]] = out[i];
    }
    fft4(unit_.dims(), g.v, true);
    return g;
}

Field CovarianceOps::apply_sqrt(const Field& f) const
{
    ensure_sqrt_blocks();
    return apply_blocks(f, sqrt_blocks_);
}

Field CovarianceOps::apply_sqrt_transpose(const Field& f) const
{
    return flip_field(apply_sqrt(flip_field(f)));
}

LinOp CovarianceOps::C_op() const
{
    auto self = this;
    return {unit_, unit_,
            [self](const Field& f) { return self->apply_C(f); },
            [self](const Field& f) { return self->apply_C_transpose(f); }};
}

LinOp CovarianceOps::Cinv_op() const { return cinv_->as_linop(); }

LinOp CovarianceOps::sqrt_op() const
{
    auto self = this;
    return {unit_, unit_,
            [self](const Field& f) { return self->apply_sqrt(f); },
            [self](const Field& f) { return self->apply_sqrt_transpose(f); }};
}

} // namespace pflow
