#include "doctest.h"

#include <numbers>

#include "pflow/fft.hpp"
#include "pflow/field.hpp"
#include "pflow/lattice.hpp"
#include "pflow/rng.hpp"
#include "pflow/simd.hpp"

using namespace pflow;

namespace {

double rel_err(cplx a, cplx b)
{
    const double den = std::max({std::abs(a), std::abs(b), 1e-300});
    return std::abs(a - b) / den;
}

double field_rel_err(const Field& a, const Field& b)
{
    double num = 0, den = 0;
    for (std::int64_t i = 0; i < a.size(); ++i) {
        num += std::norm(a.v[i] - b.v[i]);
        den += std::norm(a.v[i]) + std::norm(b.v[i]);
    }
    return den == 0 ? std::sqrt(num) : std::sqrt(num / den);
}

} // namespace

TEST_CASE("simd: avx2 kernels match scalar reference")
{
    const auto& sc = simd::scalar_kernels();
    const auto* vx = simd::avx2_kernels();
    if (vx == nullptr) {
        MESSAGE("avx2 not compiled in; scalar only");
        return;
    }
    Rng rng(42);
    for (std::size_t n : {std::size_t{1}, std::size_t{7}, std::size_t{64},
                          std::size_t{243}, std::size_t{1001}}) {
        std::vector<cplx> x(n), y(n), y2(n), z(n), z2(n);
        for (std::size_t i = 0; i < n; ++i) {
            x[i] = rng.cplx_sym();
            y[i] = rng.cplx_sym();
        }
        y2 = y;
        const cplx a = rng.cplx_sym();

        sc.axpy(y.data(), a, x.data(), n);
        vx->axpy(y2.data(), a, x.data(), n);
        for (std::size_t i = 0; i < n; ++i)
            CHECK(std::abs(y[i] - y2[i]) < 1e-14);

        sc.cmul(z.data(), x.data(), y.data(), n);
        vx->cmul(z2.data(), x.data(), y.data(), n);
        for (std::size_t i = 0; i < n; ++i)
            CHECK(std::abs(z[i] - z2[i]) < 1e-14);

        CHECK(rel_err(sc.dot_bilinear(x.data(), y.data(), n),
                      vx->dot_bilinear(x.data(), y.data(), n)) < 1e-13);
        CHECK(rel_err(sc.sum(x.data(), n), vx->sum(x.data(), n)) < 1e-13);
        CHECK(sc.sum_abs2(x.data(), n) ==
              doctest::Approx(vx->sum_abs2(x.data(), n)).epsilon(1e-13));
        CHECK(sc.sup_abs(x.data(), n) ==
              doctest::Approx(vx->sup_abs(x.data(), n)).epsilon(1e-13));
    }
}

TEST_CASE("lattice: point counts, spacings, degenerate rejection")
{
    // L=3, Ltp=9, Lsp=3, j=0, n=0 -> 9*27 = 243 points
    Lattice l0(LatticeSpec{3, 9, 3, 0, 0});
    CHECK(l0.num_points() == 243);
    CHECK(l0.cell_volume() == doctest::Approx(1.0));

    // |X_j^{(n)}| = |X_0| / L^{5n} for all j
    Lattice l1(LatticeSpec{3, 81, 9, 0, 1});
    Lattice l1b(LatticeSpec{3, 81, 9, 1, 1});
    Lattice l1c(LatticeSpec{3, 81, 9, -1, 1});
    const Lattice base(LatticeSpec{3, 81, 9, 0, 0});
    CHECK(l1.num_points() == base.num_points() / 243);
    CHECK(l1.num_points() == l1b.num_points());
    CHECK(l1.num_points() == l1c.num_points());

    // degenerate quotient rejected
    CHECK_THROWS_AS(Lattice(LatticeSpec{3, 9, 3, 0, 2}), ConfigError);
    CHECK_THROWS_AS(Lattice(LatticeSpec{4, 16, 4, 0, 0}), ConfigError);
    CHECK_THROWS_AS(Lattice(LatticeSpec{3, 27, 3, 0, 0}), ConfigError); // odd power

    // vol * |points| = physical 4-volume
    const Lattice lj(LatticeSpec{3, 81, 9, 1, 1});
    const double vol4 = lj.cell_volume() * lj.num_points();
    CHECK(vol4 == doctest::Approx((81.0 / std::pow(3, 4)) *
                                  std::pow(9.0 / std::pow(3, 2), 3)));
}

TEST_CASE("lattice: enumeration round-trip and metric axioms")
{
    Lattice l(LatticeSpec{3, 9, 3, 1, 0});
    for (std::int64_t i = 0; i < l.num_points(); ++i)
        CHECK(l.index_of(l.coords_of(i)) == i);

    Rng rng(7);
    for (int t = 0; t < 50; ++t) {
        const auto i = static_cast<std::int64_t>(rng.next() % l.num_points());
        const auto j = static_cast<std::int64_t>(rng.next() % l.num_points());
        const auto k = static_cast<std::int64_t>(rng.next() % l.num_points());
        CHECK(l.distance(i, i) == 0.0);
        CHECK(l.distance(i, j) == doctest::Approx(l.distance(j, i)));
        CHECK(l.distance(i, k) <= l.distance(i, j) + l.distance(j, k) + 1e-12);
    }
}

TEST_CASE("lattice: metric stretches under the coarse map")
{
    // d_{j-1}(Lu, Lu') >= d_j(u, u') with the identity index map
    Lattice fine(LatticeSpec{3, 9, 3, 1, 0});
    Lattice coarse = coarser_relabel(fine);
    Rng rng(8);
    for (int t = 0; t < 50; ++t) {
        const auto i = static_cast<std::int64_t>(rng.next() % fine.num_points());
        const auto j = static_cast<std::int64_t>(rng.next() % fine.num_points());
        CHECK(coarse.distance(i, j) >= fine.distance(i, j) - 1e-12);
    }
}

TEST_CASE("field: inner product bilinear symmetry and constants")
{
    Lattice l(LatticeSpec{3, 9, 3, 0, 0});
    // <1,1> = vol |X|
    const Field one = constant_field(l, 1.0);
    CHECK(rel_err(inner(one, one), cplx(l.cell_volume() * l.num_points(), 0)) <
          1e-14);

    Rng rng(3);
    const Field f = random_field(l, rng), g = random_field(l, rng);
    CHECK(rel_err(inner(f, g), inner(g, f)) < 1e-14);

    // lattice mismatch
    Lattice other(LatticeSpec{3, 9, 3, 1, 0});
    const Field h(other);
    CHECK_THROWS_AS((void)inner(f, h), ConfigError);
}

TEST_CASE("field: scaling operators")
{
    Lattice lm1(LatticeSpec{3, 9, 3, -1, 1});
    Rng rng(4);
    const Field alpha = random_field(lm1, rng);
    const Field beta = scale_up(alpha);

    // constant pull-back: S of constant c is constant L^{3/2} c
    const Field c = constant_field(lm1, cplx{0.3, -0.7});
    CHECK(field_rel_err(scale_up(c),
                        constant_field(scale_up(c).lat,
                                       std::pow(3.0, 1.5) * cplx{0.3, -0.7})) <
          1e-14);

    // inverse round-trip
    CHECK(field_rel_err(scale_up(scale_down(beta)), beta) < 1e-14);

    // <S a, S a'>_j = L^{-2} <a, a'>_{j-1}
    const Field alpha2 = random_field(lm1, rng);
    CHECK(rel_err(inner(scale_up(alpha), scale_up(alpha2)),
                  inner(alpha, alpha2) / 9.0) < 1e-13);

    // adjoint relation <S a, b>_j = L^{-2} <a, S^{-1} b>_{j-1}
    const Field b = random_field(scale_up(alpha).lat, rng);
    CHECK(rel_err(inner(scale_up(alpha), b),
                  inner(alpha, scale_down(b)) / 9.0) < 1e-13);
}

TEST_CASE("field: forward derivative")
{
    Lattice l(LatticeSpec{3, 9, 3, 0, 0});
    // constant -> zero
    const Field c = constant_field(l, cplx{1.0, 2.0});
    for (int nu = 0; nu < 4; ++nu)
        CHECK(forward_derivative(c, nu).sup() == 0.0);

    // sawtooth x1 has unit slope at interior points
    Field saw(l);
    for (std::int64_t i = 0; i < l.num_points(); ++i)
        saw.v[i] = static_cast<double>(l.coords_of(i)[1]);
    const Field d = forward_derivative(saw, 1);
    for (std::int64_t i = 0; i < l.num_points(); ++i) {
        if (l.coords_of(i)[1] + 1 < l.dims()[1])
            CHECK(std::abs(d.v[i] - cplx{1.0, 0.0}) < 1e-14);
    }

    // S_nu d_nu = d_nu S on random fields
    Lattice lm1(LatticeSpec{3, 9, 3, -1, 1});
    Rng rng(5);
    const Field a = random_field(lm1, rng);
    for (int nu = 0; nu < 4; ++nu) {
        const auto mode = nu == 0 ? ScaleMode::time_deriv : ScaleMode::space_deriv;
        const Field lhs = scale_up(forward_derivative(a, nu), mode);
        const Field rhs = forward_derivative(scale_up(a), nu);
        CHECK(field_rel_err(lhs, rhs) < 1e-13);
    }
}

TEST_CASE("field: marginality of the time derivative and spatial laplacian")
{
    Lattice l0(LatticeSpec{3, 9, 3, 0, 0});
    Rng rng(6);
    const Field psis = random_field(l0, rng), psi = random_field(l0, rng);

    const cplx t0 = inner(psis, forward_derivative(psi, 0));
    const Field ds = scale_down(psis), dp = scale_down(psi);
    const cplx t1 = inner(ds, forward_derivative(dp, 0));
    CHECK(rel_err(t0, t1) < 1e-12);

    auto laplacian = [](const Field& f) {
        Field acc(f.lat);
        for (int nu = 1; nu < 4; ++nu) {
            const Field d = forward_derivative(f, nu);
            const Field dd = forward_derivative(d, nu);
            acc += dd;
        }
        return acc;
    };
    const cplx s0 = inner(psis, laplacian(psi));
    const cplx s1 = inner(ds, laplacian(dp));
    CHECK(rel_err(s0, s1) < 1e-12);
}

TEST_CASE("field: chi0 cutoff predicate")
{
    Lattice l(LatticeSpec{3, 9, 3, 0, 0});
    const CutoffParams p = default_cutoff(0.01, 1.0, 1e-4, 1e-5);

    CHECK(chi0_cutoff(constant_field(l, 0.0), p));

    const double amp = std::exp(p.theta * p.mu / 2.0) *
                       std::pow(1.0 / (p.theta * p.v), p.e_R + p.e_r);
    CHECK_FALSE(chi0_cutoff(constant_field(l, 2.0 * amp), p));
    // boundary field at exactly the amplitude bound passes (closed inequality)
    CHECK(chi0_cutoff(constant_field(l, amp), p));
}

TEST_CASE("fft: roundtrip and plane-wave diagonal")
{
    Lattice l(LatticeSpec{3, 9, 3, 0, 0});
    Rng rng(9);
    Field f = random_field(l, rng);
    Field g = f;
    fft4(l.dims(), g.v, false);
    fft4(l.dims(), g.v, true);
    CHECK(field_rel_err(f, g) < 1e-13);

    // delta transforms to all-ones
    Field d(l);
    d.v[0] = 1.0;
    fft4(l.dims(), d.v, false);
    for (auto z : d.v)
        CHECK(std::abs(z - cplx{1.0, 0.0}) < 1e-12);
}
