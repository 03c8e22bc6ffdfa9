#include "doctest.h"

#include "pflow/action.hpp"

using namespace pflow;

namespace {

double rel_err(cplx a, cplx b)
{
    const double den = std::max({std::abs(a), std::abs(b), 1e-300});
    return std::abs(a - b) / den;
}

struct Setup {
    AveragingProfile prof = build_profile(4, 3);
    KineticSpec kin{1.0, 1.0, nullptr};
    LatticeSpec base{3, 81, 9, 0, 0};   // n = 1 step geometry
    LatticeSpec base0{3, 9, 9, 0, 0};   // n = 0 step geometry

    LatticeSpec base_for(int n) const { return n == 0 ? base0 : base; }
    Lattice fine_for(int n) const
    {
        LatticeSpec s = base_for(n);
        s.j = n;
        return Lattice(s);
    }
};

} // namespace

TEST_CASE("action: zero fields, bilinearity, constant-field well")
{
    Setup su;
    const cplx mu{1e-3, 0.0};
    const Lattice Xf(LatticeSpec{3, 81, 9, 1, 0});
    const QuarticKernel V = onsite_quartic(Xf, 0.02);
    const BgCtx c = make_bg_ctx(su.base, 1, 1.0, mu, V, su.prof, su.kin);
    Rng rng(51);

    CHECK(std::abs(eval_action(c, Field(c.X0), Field(c.X0), Field(c.Xf),
                               Field(c.Xf))) == 0.0);

    // bilinearity of the coupling term in (psi_*, psi) at fixed phi
    const Field ps1 = random_field(c.X0, rng), ps2 = random_field(c.X0, rng);
    const Field p1 = random_field(c.X0, rng);
    const Field phis = random_field(c.Xf, rng, 0.3), phi = random_field(c.Xf, rng, 0.3);
    const cplx a{0.7, -0.2}, b{1.1, 0.4};
    const cplx lhs = eval_action(c, a * ps1 + b * ps2, p1, phis, phi);
    const cplx r1 = eval_action(c, ps1, p1, phis, phi);
    const cplx r2 = eval_action(c, ps2, p1, phis, phi);
    const cplx base = eval_action(c, Field(c.X0), p1, phis, phi);
    // A(a ps1 + b ps2) - base = a (A(ps1) - base) + b (A(ps2) - base)
    CHECK(rel_err(lhs - base, a * (r1 - base) + b * (r2 - base)) < 1e-11);

    // constant fields with the mass-one averaging profile: the coupling and
    // kinetic terms vanish, leaving V(c*, c) - mu |c|^2 vol |X_n|
    const cplx cc{0.4, 0.1};
    const Field cpsi = constant_field(c.X0, cc);
    const Field cphi = constant_field(c.Xf, cc);
    const cplx an = eval_action(c, conj(cpsi), cpsi, conj(cphi), cphi);
    const cplx well = quartic::eval(c.V, conj(cphi), cphi) -
                      mu * inner(conj(cphi), cphi);
    CHECK(rel_err(an, well) < 1e-10);
}

TEST_CASE("scaled action: two evaluation paths agree (n = 0, 1)")
{
    Setup su;
    Rng rng(52);
    for (int n : {0, 1}) {
        const Lattice Xf = su.fine_for(n);
        const cplx mu{2e-3, 5e-4};
        const QuarticKernel V = onsite_quartic(Xf, 0.01, 0.002);
        const StepCtx s =
            make_step_ctx(su.base_for(n), n, 1.0, mu, V, su.prof, su.kin);

        const Field thetas = random_field(s.Xm1, rng);
        const Field theta = random_field(s.Xm1, rng);
        const Field phcks = random_field(s.Xn(), rng);
        const Field phck = random_field(s.Xn(), rng);

        const ACheckResult r =
            eval_action_check(s, thetas, theta, phcks, phck, 1e-9);
        CHECK(r.discrepancy < 1e-10);

        // zero fields give zero
        const ACheckResult z = eval_action_check(
            s, Field(s.Xm1), Field(s.Xm1), Field(s.Xn()), Field(s.Xn()), 1e-9);
        CHECK(std::abs(z.value) == 0.0);
    }
}

TEST_CASE("scaled action: explicit n = 0 closed form")
{
    // Acheck_1(theta, psi) = (a/L^2) <theta_* - Q psi_*, theta - Q psi>_{-1}
    //                        + A_0(psi_*, psi)
    Setup su;
    const cplx mu{1e-3, 0.0};
    const Lattice X0(su.base0);
    const QuarticKernel V = onsite_quartic(X0, 0.015);
    const StepCtx s = make_step_ctx(su.base0, 0, 1.0, mu, V, su.prof, su.kin);
    Rng rng(53);

    const Field thetas = random_field(s.Xm1, rng);
    const Field theta = random_field(s.Xm1, rng);
    const Field psis = random_field(X0, rng);
    const Field psi = random_field(X0, rng);

    const ACheckResult r = eval_action_check(s, thetas, theta, psis, psi);
    const Field us = thetas - s.Q.apply(psis);
    const Field u = theta - s.Q.apply(psi);
    const cplx direct =
        (1.0 / 9.0) * inner(us, u) + eval_action0(*s.bg, psis, psi);
    CHECK(rel_err(r.value, direct) < 1e-12);
}

TEST_CASE("exponent split at n = 0 and n = 1")
{
    Setup su;
    Rng rng(54);
    for (int n : {0, 1}) {
        const Lattice Xf = su.fine_for(n);
        const cplx mu{4e-4, 1e-4};
        const QuarticKernel V = onsite_quartic(Xf, 2e-4);
        const StepCtx s =
            make_step_ctx(su.base_for(n), n, 1.0, mu, V, su.prof, su.kin);

        for (int seed = 0; seed < 2; ++seed) {
            const Field thetas = random_field(s.Xm1, rng, 0.4);
            const Field theta = random_field(s.Xm1, rng, 0.4);
            const Field dpsis = random_field(s.X0n(), rng, 0.15);
            const Field dpsi = random_field(s.X0n(), rng, 0.15);
            const ExponentSplit es =
                exponent_split(s, thetas, theta, dpsis, dpsi);
            CAPTURE(n);
            CAPTURE(seed);
            CHECK(es.residual < 1e-9);
        }
    }
}

TEST_CASE("exponent split rejects a constructed sign error")
{
    Setup su;
    const Lattice Xf = su.fine_for(1);
    const QuarticKernel V = onsite_quartic(Xf, 2e-4);
    const StepCtx s =
        make_step_ctx(su.base_for(1), 1, 1.0, cplx{4e-4, 1e-4}, V, su.prof, su.kin);
    Rng rng(58);
    const Field thetas = random_field(s.Xm1, rng, 0.4);
    const Field theta = random_field(s.Xm1, rng, 0.4);
    const Field dpsis = random_field(s.X0n(), rng, 0.15);
    const Field dpsi = random_field(s.X0n(), rng, 0.15);
    const ExponentSplit es = exponent_split(s, thetas, theta, dpsis, dpsi);
    CHECK(es.residual < 1e-9);
    // flipping the remainder term must break the identity loudly
    const double wrong = std::abs(es.lhs - es.gauss + es.dA) /
                         std::max(std::abs(es.lhs), 1e-300);
    CHECK(wrong > 1e-6);
}

TEST_CASE("composition identity for the scaled action at the background")
{
    // Acheck_{n+1}(theta, phck_{n+1}) = (a/L^2) <theta - Q psi_n ...>_{-1}
    //                                   + A_n(psi_n, phck_{n+1})
    Setup su;
    const Lattice Xf(LatticeSpec{3, 81, 9, 1, 0});
    const cplx mu{3e-4, 0.0};
    const QuarticKernel V = onsite_quartic(Xf, 2e-4);
    const StepCtx s = make_step_ctx(su.base, 1, 1.0, mu, V, su.prof, su.kin);
    Rng rng(55);

    const Field thetas = random_field(s.Xm1, rng, 0.4);
    const Field theta = random_field(s.Xm1, rng, 0.4);
    const CriticalFields cf = critical_fields(s, thetas, theta);

    const ACheckResult lhs =
        eval_action_check(s, thetas, theta, cf.phcks, cf.phck);
    const Field us = thetas - s.Q.apply(cf.psis);
    const Field u = theta - s.Q.apply(cf.psi);
    const cplx rhs = (1.0 / 9.0) * inner(us, u) +
                     eval_action(*s.bg, cf.psis, cf.psi, cf.phcks, cf.phck);
    CHECK(rel_err(lhs.value, rhs) < 1e-9);
}

TEST_CASE("step exponents: empty corrections and gaussian diagonalization")
{
    Setup su;
    const Lattice Xf(LatticeSpec{3, 81, 9, 1, 0});
    const cplx mu{3e-4, 0.0};
    const QuarticKernel V = onsite_quartic(Xf, 2e-4);
    const StepCtx s = make_step_ctx(su.base, 1, 1.0, mu, V, su.prof, su.kin);
    Rng rng(56);

    const Field thetas = random_field(s.Xm1, rng, 0.4);
    const Field theta = random_field(s.Xm1, rng, 0.4);
    const TypedPolynomial empty{s.Xn(), {}};
    const TypedPolynomial emptyE{s.X0n(), {}};

    // zeta = 0: the corrections vanish and C reduces to -Acheck at the
    // background
    const StepExponents ze = assemble_step_exponents(
        s, thetas, theta, Field(s.X0n()), Field(s.X0n()), empty, emptyE);
    CHECK(std::abs(ze.dR_check) == 0.0);
    CHECK(std::abs(ze.dE_check) == 0.0);
    CHECK(std::abs(ze.dA_check) < 1e-12);
    const CriticalFields cf = critical_fields(s, thetas, theta);
    const ACheckResult ac =
        eval_action_check(s, thetas, theta, cf.phcks, cf.phck);
    CHECK(rel_err(ze.C_check, -ac.value) < 1e-12);

    // random zeta: gaussian diagonalization to 1e-10
    const Field zetas = conj(random_field(s.X0n(), rng, 0.3));
    const Field zeta = random_field(s.X0n(), rng, 0.3);
    const StepExponents se =
        assemble_step_exponents(s, thetas, theta, zetas, zeta, empty, emptyE);
    CHECK(se.resid_gauss < 1e-10);
    CHECK(se.resid_C < 1e-9);
    CHECK(se.resid_A < 1e-9);

    // normalization log-counts
    CHECK(se.log_NT ==
          doctest::Approx(-static_cast<double>(s.Xm1.num_points()) *
                          std::log(27.0)));
    CHECK(se.log_NS ==
          doctest::Approx(3.0 * s.bg1->X0.num_points() * std::log(3.0)));
}

TEST_CASE("step exponents: scaled/unscaled pairs with corrections (n=0,1)")
{
    Setup su;
    Rng rng(57);
    for (int n : {0, 1}) {
        const Lattice Xf = su.fine_for(n);
        const cplx mu{4e-4, 0.0};
        const QuarticKernel V = onsite_quartic(Xf, 2e-4);
        const StepCtx s =
            make_step_ctx(su.base_for(n), n, 1.0, mu, V, su.prof, su.kin);

        const TypeVector rtypes[] = {{1, 1, 0}, {0, 0, 2}};
        const TypedPolynomial R =
            random_poly(s.Xn(), rng, rtypes, 2, 1, 1e-3);
        const TypeVector etypes[] = {{4, 0, 0}};
        const TypedPolynomial E =
            random_poly(s.X0n(), rng, etypes, 2, 1, 1e-3);

        const Field thetas = random_field(s.Xm1, rng, 0.4);
        const Field theta = random_field(s.Xm1, rng, 0.4);
        const Field zetas = conj(random_field(s.X0n(), rng, 0.3));
        const Field zeta = random_field(s.X0n(), rng, 0.3);

        const StepExponents se =
            assemble_step_exponents(s, thetas, theta, zetas, zeta, R, E);
        CAPTURE(n);
        CHECK(se.resid_C < 1e-9);
        CHECK(se.resid_A < 1e-9);
        CHECK(se.resid_R < 1e-9);
        CHECK(se.resid_E < 1e-9);
        CHECK(se.resid_gauss < 1e-10);
    }
}
