#include "pflow/background.hpp"

namespace pflow {

BgCtx make_bg_ctx(const LatticeSpec& base, int m, double a, cplx mu,
                  QuarticKernel V, const AveragingProfile& prof,
                  const KineticSpec& kin)
{
    BgCtx c;
    c.base = base;
    c.m = m;
    c.a = a;
    c.mu = mu;
    c.V = std::move(V);
    c.prof = prof;
    c.kin = kin;

    LatticeSpec s = base;
    s.j = 0;
    s.n = m;
    c.X0 = Lattice(s);
    s.j = m;
    s.n = 0;
    c.Xf = Lattice(s);

    if (!c.V.lattice().same_geometry(c.Xf))
        throw ConfigError("bg ctx: interaction kernel lattice mismatch");

    c.Dm = kinetic_op(c.Xf, kin, m);
    if (m >= 1) {
        c.Qm = avg_chain(prof, c.Xf, m);
        c.fQ = quad_coupling_table(prof, c.X0, m, a);
        c.fQ_op = real_multiplier_op(c.X0, c.fQ);
        c.S = std::make_shared<GreensOp>(c.Xf, c.X0, prof, kin, m, a, mu);
        c.S0 = mu == cplx{} ? c.S
                            : std::make_shared<GreensOp>(c.Xf, c.X0, prof, kin,
                                                         m, a, cplx{});
    } else {
        c.Qm = identity_op(c.X0);
    }
    return c;
}

namespace {

// right-hand sides Q^T fQ psi
std::pair<Field, Field> bg_rhs(const BgCtx& c, const Field& psis,
                               const Field& psi)
{
    return {c.Qm.apply_transpose(c.fQ_op.apply(psis)),
            c.Qm.apply_transpose(c.fQ_op.apply(psi))};
}

} // namespace

BackgroundSolution solve_background(const BgCtx& c, const Field& psis,
                                    const Field& psi,
                                    const BackgroundOptions& opt)
{
    if (c.m < 1)
        throw ConfigError("solve_background: needs scale m >= 1");
    if (opt.radius > 0.0) {
        // soft small-field check; identities remain meaningful slightly
        // outside the contraction regime
        const double sup = std::max(psis.sup(), psi.sup());
        if (sup > 2.0 * opt.radius)
            throw SolverError("background: fields far outside the small-field "
                              "radius");
    }

    BackgroundSolution out;
    out.radius_warning =
        opt.radius > 0.0 && std::max(psis.sup(), psi.sup()) > opt.radius;

    const auto [rs, r] = bg_rhs(c, psis, psi);
    Field phis = c.S->solve_transpose(rs);
    Field phi = c.S->solve(r);
    if (opt.warm_start != nullptr) {
        phis = opt.warm_start->phis;
        phi = opt.warm_start->phi;
    }

    double prev_change = 1e300;
    int grow_streak = 0;
    for (int it = 0; it < opt.max_iterations; ++it) {
        Field gs = rs - quartic::grad_star(c.V, phis, phi, phis);
        Field gu = r - quartic::grad(c.V, phi, phis, phi);
        Field nphis = c.S->solve_transpose(gs);
        Field nphi = c.S->solve(gu);
        const double change =
            std::max((nphis - phis).sup(), (nphi - phi).sup());
        if (!std::isfinite(change))
            throw SolverError("background: iterate blew up, |psi| sup " +
                              std::to_string(std::max(psis.sup(), psi.sup())));
        phis = std::move(nphis);
        phi = std::move(nphi);
        out.iterations = it + 1;
        if (change > prev_change) {
            if (++grow_streak >= 5)
                throw SolverError(
                    "background: iteration diverging, |psi| sup " +
                    std::to_string(std::max(psis.sup(), psi.sup())));
        } else {
            grow_streak = 0;
        }
        out.contraction = prev_change > 0 ? change / prev_change : 0.0;
        prev_change = change;
        if (change <= opt.change_tol)
            break;
    }

    out.phis = std::move(phis);
    out.phi = std::move(phi);
    const auto res = background_residual(c, psis, psi, out.phis, out.phi);
    out.residual_star = res.first;
    out.residual = res.second;
    return out;
}

std::pair<double, double> background_residual(const BgCtx& c, const Field& psis,
                                              const Field& psi,
                                              const Field& phis,
                                              const Field& phi)
{
    const auto [rs, r] = bg_rhs(c, psis, psi);
    Field e1 = c.S->apply_transpose(phis); // S^{*-1}(mu) phi_*
    e1 += quartic::grad_star(c.V, phis, phi, phis);
    e1 -= rs;
    Field e2 = c.S->apply(phi);
    e2 += quartic::grad(c.V, phi, phis, phi);
    e2 -= r;
    return {e1.sup(), e2.sup()};
}

} // namespace pflow
