#include "doctest.h"

#include "pflow/action.hpp"

using namespace pflow;

namespace {

double field_rel_err(const Field& a, const Field& b)
{
    double num = 0, den = 0;
    for (std::int64_t i = 0; i < a.size(); ++i) {
        num += std::norm(a.v[i] - b.v[i]);
        den += std::norm(a.v[i]) + std::norm(b.v[i]);
    }
    return den == 0 ? std::sqrt(num) : std::sqrt(num / den);
}

struct Setup {
    AveragingProfile prof = build_profile(4, 3);
    KineticSpec kin{1.0, 1.0, nullptr};
    LatticeSpec base{3, 81, 9, 0, 0};
};

} // namespace

TEST_CASE("background: exact linear solution at V=0 and zero fixed point")
{
    Setup su;
    const cplx mu{2e-3, 5e-4};
    const Lattice Xf(LatticeSpec{3, 81, 9, 1, 0});
    const BgCtx c = make_bg_ctx(su.base, 1, 1.0, mu, QuarticKernel(Xf), su.prof,
                                su.kin);
    Rng rng(41);
    const Field psis = random_field(c.X0, rng), psi = random_field(c.X0, rng);

    const BackgroundSolution sol = solve_background(c, psis, psi);
    // V = 0: phi = S(mu) Q^T fQ psi after the first iteration
    const Field expect =
        c.S->solve(c.Qm.apply_transpose(c.fQ_op.apply(psi)));
    const Field expect_s =
        c.S->solve_transpose(c.Qm.apply_transpose(c.fQ_op.apply(psis)));
    CHECK(field_rel_err(sol.phi, expect) < 1e-12);
    CHECK(field_rel_err(sol.phis, expect_s) < 1e-12);
    CHECK(sol.iterations <= 2);
    CHECK(sol.residual < 1e-11);
    CHECK(sol.residual_star < 1e-11);

    // zero input gives the zero fixed point
    const BackgroundSolution z = solve_background(c, Field(c.X0), Field(c.X0));
    CHECK(z.phi.sup() == 0.0);
    CHECK(z.phis.sup() == 0.0);
}

TEST_CASE("background: quartic solve residuals and degree counting")
{
    Setup su;
    const cplx mu{1e-3, 0.0};
    const Lattice Xf(LatticeSpec{3, 81, 9, 1, 0});
    const QuarticKernel V = onsite_quartic(Xf, 1e-4);
    const BgCtx c = make_bg_ctx(su.base, 1, 1.0, mu, V, su.prof, su.kin);
    Rng rng(42);
    const Field psis = random_field(c.X0, rng), psi = random_field(c.X0, rng);

    const BackgroundSolution sol = solve_background(c, psis, psi);
    CHECK(sol.residual < 1e-11);
    CHECK(sol.residual_star < 1e-11);

    // degree counting: phi^{(>=3)}(s psi)/s^3 converges as s -> 0; a larger
    // coupling keeps the cubic tail well above the solver tolerance
    const QuarticKernel Vbig = onsite_quartic(Xf, 10.0);
    const BgCtx cbig = make_bg_ctx(su.base, 1, 1.0, mu, Vbig, su.prof, su.kin);
    auto tail_norm = [&](double s) {
        const BackgroundSolution bs =
            solve_background(cbig, cplx{s, 0} * psis, cplx{s, 0} * psi);
        const Field lin = cbig.S->solve(
            cbig.Qm.apply_transpose(cbig.fQ_op.apply(cplx{s, 0} * psi)));
        return (bs.phi - lin).sup();
    };
    const double t1 = tail_norm(1.0), t2 = tail_norm(0.5);
    const double slope = std::log2(t1 / t2);
    CHECK(slope > 2.9);
    CHECK(slope < 3.1);

    // constant-field closure: real constant inputs give a constant solution
    // with phi_* = phi
    const Field cst = constant_field(c.X0, cplx{0.35, 0.0});
    const BackgroundSolution cs = solve_background(c, cst, cst);
    CHECK(field_rel_err(cs.phis, cs.phi) < 1e-11);
    const cplx v0 = cs.phi.v[0];
    for (auto z : cs.phi.v)
        CHECK(std::abs(z - v0) < 1e-11);

    // time-reflection transport with conjugation maps solutions to solutions
    auto reflect0_conj = [&](const Field& f) {
        Field g(f.lat);
        for (std::int64_t i = 0; i < f.size(); ++i) {
            auto cc = f.lat.coords_of(i);
            cc[0] = -cc[0];
            g.v[f.lat.index_of(cc)] = std::conj(f.v[i]);
        }
        return g;
    };
    const BackgroundSolution tr =
        solve_background(c, reflect0_conj(psi), reflect0_conj(psis));
    CHECK(field_rel_err(tr.phis, reflect0_conj(sol.phi)) < 1e-10);
    CHECK(field_rel_err(tr.phi, reflect0_conj(sol.phis)) < 1e-10);

    // spatial translation transport (one unit-lattice step)
    auto translate = [&](const Field& f, std::int64_t tsteps, std::int64_t xsteps) {
        Field g(f.lat);
        for (std::int64_t i = 0; i < f.size(); ++i) {
            auto cc = f.lat.coords_of(i);
            cc[0] += tsteps;
            cc[1] += xsteps;
            g.v[f.lat.index_of(cc)] = f.v[i];
        }
        return g;
    };
    const BackgroundSolution tt =
        solve_background(c, translate(psis, 1, 1), translate(psi, 1, 1));
    // unit translation on X_0^{(1)} is (L^2, L) index steps on X_1
    CHECK(field_rel_err(tt.phi, translate(sol.phi, 9, 3)) < 1e-10);
}

TEST_CASE("background: divergence detection and radius enforcement")
{
    Setup su;
    const Lattice Xf(LatticeSpec{3, 81, 9, 1, 0});
    const QuarticKernel V = onsite_quartic(Xf, 1e6);
    const BgCtx c = make_bg_ctx(su.base, 1, 1.0, cplx{}, V, su.prof, su.kin);
    Rng rng(43);
    const Field psis = random_field(c.X0, rng, 100.0);
    const Field psi = random_field(c.X0, rng, 100.0);
    CHECK_THROWS_AS((void)solve_background(c, psis, psi), SolverError);

    // fields beyond twice the small-field radius are rejected outright
    BackgroundOptions opt;
    opt.radius = 1.0;
    CHECK_THROWS_AS((void)solve_background(c, psis, psi, opt), SolverError);
}

TEST_CASE("critical fields: linear part, composition law, criticality")
{
    Setup su;
    const cplx mu{5e-4, 0.0};
    const Lattice Xf(LatticeSpec{3, 81, 9, 1, 0});

    // V = 0, mu = 0: psi_n = (a/L^2) C^{(n)} Q^T theta exactly
    {
        const StepCtx s = make_step_ctx(su.base, 1, 1.0, cplx{},
                                        QuarticKernel(Xf), su.prof, su.kin);
        Rng rng(44);
        const Field thetas = random_field(s.Xm1, rng);
        const Field theta = random_field(s.Xm1, rng);
        const CriticalFields cf = critical_fields(s, thetas, theta);
        const Field lin =
            (1.0 / 9.0) * s.cov0->apply_C(s.Q.apply_transpose(theta));
        CHECK(field_rel_err(cf.psi, lin) < 1e-10);
        // theta = 0 -> psi = 0
        const CriticalFields z = critical_fields(s, Field(s.Xm1), Field(s.Xm1));
        CHECK(z.psi.sup() == 0.0);
    }

    const QuarticKernel V = onsite_quartic(Xf, 3e-4);
    const StepCtx s = make_step_ctx(su.base, 1, 1.0, mu, V, su.prof, su.kin);
    Rng rng(45);
    const Field thetas = random_field(s.Xm1, rng, 0.5);
    const Field theta = random_field(s.Xm1, rng, 0.5);
    const CriticalFields cf = critical_fields(s, thetas, theta);

    // composition law: phck_{n+1}(theta) = phi_n(psi_n(theta))
    const BackgroundSolution comp = solve_background(*s.bg, cf.psis, cf.psi);
    CHECK((comp.phi - cf.phck).sup() < 1e-9);
    CHECK((comp.phis - cf.phcks).sup() < 1e-9);

    // criticality: gradients of the one-step exponent vanish at psi_n
    // (envelope through the inner background solve), finite differences
    auto functional = [&](const Field& ps, const Field& p) {
        const BackgroundSolution b = solve_background(*s.bg, ps, p);
        const Field us = thetas - s.Q.apply(ps);
        const Field u = theta - s.Q.apply(p);
        return (1.0 / 9.0) * inner(us, u) + eval_action(*s.bg, ps, p, b.phis, b.phi);
    };
    const double h = 1e-5;
    Rng rng2(46);
    double sup_grad = 0.0;
    for (int probe = 0; probe < 3; ++probe) {
        const std::int64_t at =
            static_cast<std::int64_t>(rng2.next() % s.X0n().num_points());
        Field ep(s.X0n());
        ep.v[at] = 1.0;
        const cplx gp = (functional(cf.psis, cf.psi + h * ep) -
                         functional(cf.psis, cf.psi - 1.0 * h * ep)) /
                        (2.0 * h);
        const cplx gs = (functional(cf.psis + h * ep, cf.psi) -
                         functional(cf.psis - 1.0 * h * ep, cf.psi)) /
                        (2.0 * h);
        sup_grad = std::max({sup_grad, std::abs(gp), std::abs(gs)});
    }
    CHECK(sup_grad < 1e-6);
}

TEST_CASE("variation fields: zero input, V=mu=0 exactness, fixed point")
{
    Setup su;
    const Lattice Xf(LatticeSpec{3, 81, 9, 1, 0});
    Rng rng(47);

    // mu = V = 0: dphck^{(+)} = 0 exactly
    {
        const StepCtx s = make_step_ctx(su.base, 1, 1.0, cplx{},
                                        QuarticKernel(Xf), su.prof, su.kin);
        const Field thetas = random_field(s.Xm1, rng, 0.3);
        const Field theta = random_field(s.Xm1, rng, 0.3);
        const CriticalFields cf = critical_fields(s, thetas, theta);
        const Field dpsis = random_field(s.X0n(), rng, 0.1);
        const Field dpsi = random_field(s.X0n(), rng, 0.1);
        const DeltaPhi d = delta_phi(s, cf, dpsis, dpsi);
        CHECK(d.dplus.sup() < 1e-11);
        CHECK(d.dpluss.sup() < 1e-11);

        // dpsi = 0 gives all-zero outputs
        const DeltaPhi z = delta_phi(s, cf, Field(s.X0n()), Field(s.X0n()));
        CHECK(z.dphck.sup() < 1e-12);
        CHECK(z.dplus.sup() < 1e-12);
    }

    // quartic case: fixed-point characterization residual
    {
        const cplx mu{4e-4, 1e-4};
        const QuarticKernel V = onsite_quartic(Xf, 2e-4);
        const StepCtx s = make_step_ctx(su.base, 1, 1.0, mu, V, su.prof, su.kin);
        const Field thetas = random_field(s.Xm1, rng, 0.4);
        const Field theta = random_field(s.Xm1, rng, 0.4);
        const CriticalFields cf = critical_fields(s, thetas, theta);
        const Field dpsis = random_field(s.X0n(), rng, 0.2);
        const Field dpsi = random_field(s.X0n(), rng, 0.2);
        const DeltaPhi d = delta_phi(s, cf, dpsis, dpsi);
        const auto [r1, r2] = delta_phi_residual(s, cf, d, dpsis, dpsi);
        CHECK(r1 < 1e-10);
        CHECK(r2 < 1e-10);
    }
}

TEST_CASE("hat variants: scaled/unscaled consistency")
{
    Setup su;
    const Lattice Xf(LatticeSpec{3, 81, 9, 1, 0});
    const cplx mu{3e-4, 0.0};
    const QuarticKernel V = onsite_quartic(Xf, 2e-4);
    const StepCtx s = make_step_ctx(su.base, 1, 1.0, mu, V, su.prof, su.kin);
    Rng rng(48);

    const Lattice X0np1(LatticeSpec{3, 81, 9, 0, 2});
    const Field psis = random_field(X0np1, rng, 0.4);
    const Field psi = random_field(X0np1, rng, 0.4);
    const Field zs = random_field(s.X1n, rng, 0.2);
    const Field z = random_field(s.X1n, rng, 0.2);

    const HatFields h = hat_variants(s, psis, psi, zs, z);

    // z = 0 gives zero variations
    const HatFields hz = hat_variants(s, psis, psi, Field(s.X1n), Field(s.X1n));
    CHECK(hz.dhat_phi.sup() < 1e-12);

    // S^{-1}[dhat_phi^{(+)}] equals dphck^{(+)} at the matching arguments
    const Field thetas = scale_down(psis);
    const Field theta = scale_down(psi);
    const CriticalFields cf = critical_fields(s, thetas, theta);
    const Field dpsis = s.cov0->apply_sqrt_transpose(relabel_coarser(zs));
    const Field dpsi = s.cov0->apply_sqrt(relabel_coarser(z));
    const DeltaPhi d = delta_phi(s, cf, dpsis, dpsi);
    CHECK(field_rel_err(scale_down(h.dhat_plus), d.dplus) < 1e-9);
    CHECK(field_rel_err(scale_down(h.dhat_pluss), d.dpluss) < 1e-9);

    // V = mu = 0 makes the plus part vanish through the scaling wrapper
    const StepCtx s0 = make_step_ctx(su.base, 1, 1.0, cplx{},
                                     QuarticKernel(Xf), su.prof, su.kin);
    const HatFields h0 = hat_variants(s0, psis, psi, zs, z);
    CHECK(h0.dhat_plus.sup() < 1e-10);
}
