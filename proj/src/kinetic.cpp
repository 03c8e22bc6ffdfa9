#include "pflow/kinetic.hpp"

#include <numbers>

namespace pflow {

std::vector<cplx> kinetic_multiplier(const Lattice& l, const KineticSpec& kin,
                                     int scale_exp)
{
    const auto& d = l.dims();
    const double two_pi = 2.0 * std::numbers::pi;
    const double scale =
        std::pow(static_cast<double>(l.spec().L), 2.0 * scale_exp);
    std::vector<cplx> out(l.num_points());
    std::int64_t i = 0;
    for (std::int64_t a = 0; a < d[0]; ++a) {
        const cplx hop = std::exp(cplx{0.0, two_pi * static_cast<double>(a) / d[0]});
        for (std::int64_t b = 0; b < d[1]; ++b)
            for (std::int64_t c = 0; c < d[2]; ++c)
                for (std::int64_t e = 0; e < d[3]; ++e) {
                    const double h0 = kin.h0_hat(two_pi * b / d[1],
                                                 two_pi * c / d[2],
                                                 two_pi * e / d[3]);
                    out[i++] = scale * (1.0 - std::exp(-h0) * hop);
                }
    }
    return out;
}

LinOp kinetic_op(const Lattice& l, const KineticSpec& kin, int scale_exp)
{
    return multiplier_op(l, kinetic_multiplier(l, kin, scale_exp));
}

ScaleGeometry scale_geometry(const LatticeSpec& base, int n)
{
    LatticeSpec s = base;
    ScaleGeometry g;
    s.j = 0;
    s.n = n;
    g.X0n = Lattice(s);
    s.j = n;
    s.n = 0;
    g.Xn = Lattice(s);
    s.j = -1;
    s.n = n + 1;
    g.Xm1 = Lattice(s);
    s.j = 1;
    s.n = n;
    g.X1n = Lattice(s);
    return g;
}

namespace {

ClassOp build_greens_class_op(const Lattice& fine, const Lattice& unit,
                              const AveragingProfile& prof,
                              const KineticSpec& kin, int n, double a, cplx mu)
{
    auto cs = std::make_shared<ClassStructure>(fine, chain_coarse_dims(fine, n));
    std::vector<cplx> diag = kinetic_multiplier(fine, kin, n);
    for (auto& dv : diag)
        dv -= mu;
    std::vector<double> alpha = avg_chain_alpha(prof, fine, n);
    const std::vector<double> fq = quad_coupling_table(prof, unit, n, a);
    std::vector<cplx> coupling(fq.size());
    for (std::size_t i = 0; i < fq.size(); ++i)
        coupling[i] = fq[i];
    return ClassOp(std::move(cs), std::move(diag), std::move(alpha),
                   std::move(coupling));
}

} // namespace

GreensOp::GreensOp(const Lattice& fine, const Lattice& unit,
                   const AveragingProfile& prof, const KineticSpec& kin, int n,
                   double a, cplx mu)
    : fine_(fine), unit_(unit), n_(n), mu_(mu),
      op_(build_greens_class_op(fine, unit, prof, kin, n, a, mu))
{
    if (n < 0)
        throw ConfigError("greens: n must be >= 0");
}

double GreensOp::smallest_singular_value(int iters) const
{
    Rng rng(0x5eedULL);
    Field v = random_field(fine_, rng);
    double lam = 0.0;
    for (int it = 0; it < iters; ++it) {
        Field w = solve_transpose(solve(v)); // (A^T A)^{-1} v
        const double norm = std::sqrt(simd::active().sum_abs2(w.v.data(), w.v.size()));
        if (norm == 0.0)
            throw SolverError("sigma_min: breakdown");
        lam = norm;
        w *= 1.0 / norm;
        v = w;
    }
    return 1.0 / std::sqrt(lam);
}

} // namespace pflow
