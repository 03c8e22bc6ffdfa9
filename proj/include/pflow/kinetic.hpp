#ifndef PFLOW_KINETIC_HPP
#define PFLOW_KINETIC_HPP

#include <functional>

#include "pflow/blockspin.hpp"

namespace pflow {

// Single-particle kinetic data. h0 = theta * h acts on the spatial unit
// lattice; the default h = grad^T H grad with H = (1/(2 mass)) * identity on
// bonds is the scaled lattice Laplacian,
//   h0_hat(k) = (theta/(2 mass)) * sum_i 2 (1 - cos k_i).
// A custom spatial multiplier can be supplied for tests.
struct KineticSpec {
    double theta = 1.0;
    double mass = 1.0;
    std::function<double(double, double, double)> custom_hat; // optional, of k in radians

    double h0_hat(double k1, double k2, double k3) const
    {
        if (custom_hat)
            return theta * custom_hat(k1, k2, k3);
        // 1 - cos k = 2 sin^2(k/2), stable near k = 0
        auto g = [](double k) {
            const double s = std::sin(0.5 * k);
            return 2.0 * s * s;
        };
        return theta * (g(k1) + g(k2) + g(k3)) / mass;
    }
};

// multiplier table of D_n = L^{2n} (1 - e^{-h0} T_+) on a lattice whose index
// grid carries the unit-lattice momenta; scale_exp = n
std::vector<cplx> kinetic_multiplier(const Lattice& l, const KineticSpec& kin,
                                     int scale_exp);

// D_n as an operator (FFT multiplier)
LinOp kinetic_op(const Lattice& l, const KineticSpec& kin, int scale_exp);

// ---------------------------------------------------------------------------
// Green's function S_n(mu) = (D_n + Q_n^T fQ_n Q_n - mu)^{-1} on the fine
// lattice X_n. Exact direct solve: the operator is block diagonal over the
// momentum fold classes of the n-step averaging, diag + rank-1 per class.
class GreensOp {
public:
    GreensOp(const Lattice& fine, const Lattice& unit,
             const AveragingProfile& prof, const KineticSpec& kin, int n,
             double a, cplx mu);

    cplx mu() const { return mu_; }
    int n() const { return n_; }
    const Lattice& fine() const { return fine_; }

    Field solve(const Field& rhs) const { return op_.solve(rhs); }
    Field solve_transpose(const Field& rhs) const
    {
        return op_.solve_transpose(rhs);
    }
    // forward operator D_n + Q_n^T fQ_n Q_n - mu
    Field apply(const Field& f) const { return op_.apply(f); }
    Field apply_transpose(const Field& f) const { return op_.apply_transpose(f); }

    LinOp solver_linop() const { return op_.inverse_linop(); }
    LinOp forward_linop() const { return op_.as_linop(); }

    // kernel value S_n(y, x) columns: solve on a delta
    Field kernel_column(std::int64_t x) const
    {
        return solve(delta_field(fine_, x));
    }

    // smallest singular value estimate of the forward operator by inverse
    // power iteration on A^T A
    double smallest_singular_value(int iters = 60) const;

    const ClassOp& class_op() const { return op_; }

private:
    Lattice fine_, unit_;
    int n_;
    cplx mu_;
    ClassOp op_;
};

// fQ_n multiplier table shared with GreensOp construction
struct ScaleGeometry {
    Lattice X0n;  // unit lattice X_0^{(n)}
    Lattice Xn;   // fine lattice X_n
    Lattice Xm1;  // coarse lattice X_{-1}^{(n+1)}
    Lattice X1n;  // X_1^{(n)}, carrier of the scaled fluctuation variable
};
ScaleGeometry scale_geometry(const LatticeSpec& base, int n);

} // namespace pflow

#endif
