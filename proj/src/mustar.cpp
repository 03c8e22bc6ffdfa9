#include "pflow/mustar.hpp"

#include <numbers>

namespace pflow {

RootSum primitive_root_sum(int p, cplx w)
{
    const cplx wp = std::pow(w, p);
    if (std::abs(wp - cplx{1.0, 0.0}) < 1e-12)
        throw SolverError("primitive_root_sum: w^p = 1 pole");
    RootSum out;
    cplx s{};
    double term_scale = 0.0;
    for (int k = 0; k < p; ++k) {
        const cplx z =
            std::exp(cplx{0.0, 2.0 * std::numbers::pi * k / p});
        const cplx t = z / (1.0 - w * z);
        term_scale += std::abs(t);
        s += t;
    }
    out.direct = s / static_cast<double>(p);
    out.closed = std::pow(w, p - 1) / (1.0 - wp);
    // residual relative to the summand scale: the closed form can be
    // exponentially smaller than the individual terms it cancels
    out.rel_gap = std::abs(out.direct - out.closed) /
                  std::max(term_scale / p, 1e-300);
    return out;
}

namespace {

// 3-d tensor Gauss-Legendre on a box
struct Gauss1d {
    std::array<double, 8> x, w;
};

const Gauss1d& gauss8()
{
    static const Gauss1d g = [] {
        Gauss1d out;
        // nodes/weights on [-1,1]
        const double xs[4] = {0.1834346424956498, 0.5255324099163290,
                              0.7966664774136267, 0.9602898564975363};
        const double ws[4] = {0.3626837833783620, 0.3137066458778873,
                              0.2223810344533745, 0.1012285362903763};
        for (int i = 0; i < 4; ++i) {
            out.x[2 * i] = -xs[i];
            out.x[2 * i + 1] = xs[i];
            out.w[2 * i] = ws[i];
            out.w[2 * i + 1] = ws[i];
        }
        return out;
    }();
    return g;
}

double box_integral(const std::function<double(double, double, double)>& f,
                    const std::array<double, 3>& lo,
                    const std::array<double, 3>& hi)
{
    const Gauss1d& g = gauss8();
    double total = 0.0;
    const double cx = 0.5 * (hi[0] + lo[0]), hx = 0.5 * (hi[0] - lo[0]);
    const double cy = 0.5 * (hi[1] + lo[1]), hy = 0.5 * (hi[1] - lo[1]);
    const double cz = 0.5 * (hi[2] + lo[2]), hz = 0.5 * (hi[2] - lo[2]);
    for (int i = 0; i < 8; ++i)
        for (int j = 0; j < 8; ++j)
            for (int k = 0; k < 8; ++k)
                total += g.w[i] * g.w[j] * g.w[k] *
                         f(cx + hx * g.x[i], cy + hy * g.x[j], cz + hz * g.x[k]);
    return total * hx * hy * hz;
}

// octant-split refinement with a global work budget: accept a panel once the
// split changes it by less than the absolute target
double box_adaptive(const std::function<double(double, double, double)>& f,
                    const std::array<double, 3>& lo,
                    const std::array<double, 3>& hi, double abs_tol, int depth,
                    long& budget)
{
    const double coarse = box_integral(f, lo, hi);
    if (budget <= 0)
        return coarse;
    const std::array<double, 3> mid{0.5 * (lo[0] + hi[0]), 0.5 * (lo[1] + hi[1]),
                                    0.5 * (lo[2] + hi[2])};
    double fine = 0.0;
    std::array<std::array<double, 3>, 8> los, his;
    int idx = 0;
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b)
            for (int c = 0; c < 2; ++c) {
                los[idx] = {a ? mid[0] : lo[0], b ? mid[1] : lo[1],
                            c ? mid[2] : lo[2]};
                his[idx] = {a ? hi[0] : mid[0], b ? hi[1] : mid[1],
                            c ? hi[2] : mid[2]};
                fine += box_integral(f, los[idx], his[idx]);
                ++idx;
            }
    budget -= 9;
    if (std::abs(fine - coarse) <= abs_tol || depth >= 6 || budget <= 0)
        return fine;
    double total = 0.0;
    for (int i = 0; i < 8; ++i)
        total += box_adaptive(f, los[i], his[i], abs_tol / 8.0, depth + 1,
                              budget);
    return total;
}

} // namespace

double bz_integrate(const std::function<double(double, double, double)>& f,
                    double rel_tol, double sing_coeff, int max_levels)
{
    const double pi = std::numbers::pi;
    auto shell_boxes = [&](double half, auto&& visit) {
        const double h2 = half / 2.0;
        for (int a = -1; a <= 1; ++a)
            for (int b = -1; b <= 1; ++b)
                for (int c = -1; c <= 1; ++c) {
                    if (a == 0 && b == 0 && c == 0)
                        continue;
                    auto seg = [&](int s) -> std::array<double, 2> {
                        if (s < 0)
                            return {-half, -h2};
                        if (s > 0)
                            return {h2, half};
                        return {-h2, h2};
                    };
                    const auto sx = seg(a), sy = seg(b), sz = seg(c);
                    visit(std::array<double, 3>{sx[0], sy[0], sz[0]},
                          std::array<double, 3>{sx[1], sy[1], sz[1]});
                }
    };

    // first pass: plain shells fix the depth and the magnitude
    int levels = -1;
    double total0 = 0.0;
    {
        double half = pi;
        for (int lvl = 0; lvl < max_levels; ++lvl) {
            double shell = 0.0;
            shell_boxes(half, [&](const auto& lo, const auto& hi) {
                shell += box_integral(f, lo, hi);
            });
            total0 += shell;
            const double inner_bound = sing_coeff * half / 2.0;
            if (lvl > 6 && (inner_bound <= 0.5 * rel_tol * std::abs(total0) ||
                            inner_bound < 1e-300)) {
                levels = lvl + 1;
                break;
            }
            half /= 2.0;
        }
        if (levels < 0)
            throw SolverError("bz_integrate: refinement did not converge");
    }

    // second pass: refine every shell box against a shared error budget
    const double panel_tol =
        0.25 * rel_tol * std::max(std::abs(total0), 1e-300) /
        static_cast<double>(26 * levels);
    long budget = 400000; // box evaluations
    double total = 0.0;
    double half = pi;
    for (int lvl = 0; lvl < levels; ++lvl) {
        shell_boxes(half, [&](const auto& lo, const auto& hi) {
            total += box_adaptive(f, lo, hi, panel_tol, 0, budget);
        });
        half /= 2.0;
    }
    return total;
}

double mustar_fourier(const MuStarConfig& cfg)
{
    const double beta = static_cast<double>(cfg.Ltp) * cfg.kin.theta;
    const double vhat0 = cfg.v.hat_zero();
    auto f = [&](double kx, double ky, double kz) {
        const double h = cfg.kin.h0_hat(kx, ky, kz) / cfg.kin.theta;
        const double bh = beta * h;
        // 1/(e^x - 1) with a stable small-x branch
        const double bose = bh > 1e-4 ? 1.0 / std::expm1(bh) : 1.0 / bh - 0.5 +
                                             bh / 12.0;
        return (vhat0 + cfg.v.hat_at({kx, ky, kz})) * bose;
    };
    // inner-cube remainder: |f| <= 2 vabs / (beta c_h |k|^2) with
    // c_h = inf hhat/|k|^2 sampled off zero; the 1/|k|^2 ball integral is
    // 4 pi sqrt(3) h over [-h,h]^3
    double vabs = 0.0;
    for (const auto& [d, vv] : cfg.v.m)
        vabs += std::abs(vv);
    double c_h = 1e300;
    for (int a = 0; a <= 6; ++a)
        for (int b = 0; b <= 6; ++b)
            for (int c = 0; c <= 6; ++c) {
                if (a == 0 && b == 0 && c == 0)
                    continue;
                const double kx = a * std::numbers::pi / 6,
                             ky = b * std::numbers::pi / 6,
                             kz = c * std::numbers::pi / 6;
                const double k2 = kx * kx + ky * ky + kz * kz;
                c_h = std::min(c_h,
                               cfg.kin.h0_hat(kx, ky, kz) / cfg.kin.theta / k2);
            }
    const double sing_coeff = 2.0 * (vhat0 + vabs) / (beta * c_h) * 4.0 *
                              std::numbers::pi * std::sqrt(3.0) * 2.0;
    const double cube = bz_integrate(f, cfg.quad_rel_tol, sing_coeff);
    return 2.0 * cfg.kin.theta * cube / std::pow(2.0 * std::numbers::pi, 3);
}

namespace {

// spatial torus tools on an Ns^3 grid
struct SpatialGrid {
    std::int64_t Ns;
    std::array<std::int64_t, 4> dims;
    std::int64_t n3;
};

SpatialGrid grid_of(std::int64_t Ns)
{
    return {Ns, {1, Ns, Ns, Ns}, Ns * Ns * Ns};
}

// D_0^{-1}((1, x), (0, 0)) on the torus, all momenta of the kvec = 0 column
// excluded; the k0 sums are the closed primitive-root form
std::vector<double> dinv_slice1(const MuStarConfig& cfg, const SpatialGrid& g)
{
    const double two_pi = 2.0 * std::numbers::pi;
    std::vector<cplx> tab(g.n3);
    std::int64_t i = 0;
    for (std::int64_t b = 0; b < g.Ns; ++b)
        for (std::int64_t c = 0; c < g.Ns; ++c)
            for (std::int64_t e = 0; e < g.Ns; ++e) {
                if (b == 0 && c == 0 && e == 0) {
                    tab[i++] = 0.0; // excluded zero-momentum column
                    continue;
                }
                const double h0 = cfg.kin.h0_hat(two_pi * b / g.Ns,
                                                 two_pi * c / g.Ns,
                                                 two_pi * e / g.Ns);
                // (1/Ltp) sum_{k0} e^{i k0}/(1 - e^{-h0} e^{i k0}) through the
                // primitive-root closed form with w = e^{-h0}:
                //   w^{Ltp-1}/(1 - w^{Ltp}) = e^{h0}/(e^{Ltp h0} - 1)
                const double x = cfg.Ltp * h0;
                const double bose = x > 1e-4 ? 1.0 / std::expm1(x)
                                             : 1.0 / x - 0.5 + x / 12.0;
                tab[i++] = std::exp(h0) * bose;
            }
    // the momentum average (1/Ns^3) sum_k e^{ikx} K(k) is exactly the
    // normalized inverse transform
    fft4(g.dims, tab, true);
    std::vector<double> out(g.n3);
    for (std::int64_t k = 0; k < g.n3; ++k)
        out[k] = tab[k].real();
    return out;
}

// one torus size: 2 sum v_theta(0,a,b,c) G1(c) through the contracted
// heat-kernel path (exact in the kernel sums, trapezoid in t)
double mustar_lattice_size(const MuStarConfig& cfg, std::int64_t Ns, int tsteps)
{
    const SpatialGrid g = grid_of(Ns);
    const std::vector<double> g1 = dinv_slice1(cfg, g);
    const std::vector<double> vhat = cfg.v.hat_table(Ns);
    const double vhat0 = cfg.v.hat_zero();
    const double theta = cfg.kin.theta;

    // FFT of g1 for the convolutions
    std::vector<cplx> g1hat(g.n3);
    for (std::int64_t i = 0; i < g.n3; ++i)
        g1hat[i] = g1[i];
    fft4(g.dims, g1hat, false);

    // h(k) table, once per size
    std::vector<double> hk(g.n3);
    {
        const double two_pi = 2.0 * std::numbers::pi;
        std::int64_t i = 0;
        for (std::int64_t b = 0; b < g.Ns; ++b)
            for (std::int64_t c = 0; c < g.Ns; ++c)
                for (std::int64_t e = 0; e < g.Ns; ++e)
                    hk[i++] = cfg.kin.h0_hat(two_pi * b / g.Ns,
                                             two_pi * c / g.Ns,
                                             two_pi * e / g.Ns) /
                              theta;
    }

    double acc = 0.0;
    std::vector<cplx> conv(g.n3), conv2, ht(g.n3);
    for (int ti = 0; ti <= tsteps; ++ti) {
        const double t = theta * ti / tsteps;
        const double w = theta / tsteps * (ti == 0 || ti == tsteps ? 0.5 : 1.0);

        // conv = H_{theta-t} * g1 in momentum space
        for (std::int64_t i = 0; i < g.n3; ++i)
            conv[i] = g1hat[i] * std::exp(-(theta - t) * hk[i]);

        // term1 = sum_{x,y} H_t(x) v(x - y) (H * g1)(y)
        //       = sum_k Hhat_t(k) vhat(k) convhat(k) / n3
        double term1 = 0.0;
        for (std::int64_t i = 0; i < g.n3; ++i)
            term1 += std::exp(-t * hk[i]) * vhat[i] * conv[i].real();
        term1 /= static_cast<double>(g.n3);

        // term2 = vhat(0) sum_y H_t(y) (H * g1)(y)
        double term2 = 0.0;
        {
            for (std::int64_t i = 0; i < g.n3; ++i)
                ht[i] = std::exp(-t * hk[i]);
            conv2 = conv;
            fft4(g.dims, conv2, true); // (H * g1)(y)
            fft4(g.dims, ht, true);    // H_t(y)
            double s = 0.0;
            for (std::int64_t k = 0; k < g.n3; ++k)
                s += ht[k].real() * conv2[k].real();
            term2 = vhat0 * s;
        }
        acc += w * (term1 + term2);
    }
    return 2.0 * acc;
}

} // namespace

double mustar_lattice_kernel(const MuStarConfig& cfg, const Lattice& l,
                             const QuarticKernel& V0)
{
    // G(y) = D_0^{-1}(y, 0) on the full torus, zero momentum excluded
    const std::int64_t Ns = l.dims()[1];
    const std::int64_t N0 = l.dims()[0];
    const double two_pi = 2.0 * std::numbers::pi;
    std::vector<cplx> tab(l.num_points());
    std::int64_t i = 0;
    for (std::int64_t a = 0; a < N0; ++a) {
        const cplx hop = std::exp(cplx{0.0, two_pi * a / N0});
        for (std::int64_t b = 0; b < Ns; ++b)
            for (std::int64_t c = 0; c < Ns; ++c)
                for (std::int64_t e = 0; e < Ns; ++e) {
                    if (b == 0 && c == 0 && e == 0) {
                        tab[i++] = 0.0;
                        continue;
                    }
                    const double h0 = cfg.kin.h0_hat(two_pi * b / Ns,
                                                     two_pi * c / Ns,
                                                     two_pi * e / Ns);
                    tab[i++] = 1.0 / (1.0 - std::exp(-h0) * hop);
                }
    }
    fft4(l.dims(), tab, true);

    double total = 0.0;
    for (const auto& [key, v] : V0.entries()) {
        // contraction of the fourth argument against D_0^{-1}(., 0)
        const std::array<std::int64_t, 4> o4{key[8], key[9], key[10], key[11]};
        total += v * tab[l.index_of(o4)].real();
    }
    return 2.0 * total;
}

MuStarLattice mustar_lattice(const MuStarConfig& cfg)
{
    MuStarLattice out;
    std::int64_t Ns = cfg.Ns0;
    for (int i = 0; i < std::max(cfg.ladder, 2); ++i) {
        out.ladder_values.push_back(mustar_lattice_size(cfg, Ns, 4));
        Ns *= 2;
    }
    const auto& v = out.ladder_values;
    const std::size_t m = v.size();
    // two-term fit f(N) = f + a/N on the finest pair
    const double f2 = 2.0 * v[m - 1] - v[m - 2];
    if (m >= 3) {
        // three-term fit f(N) = f + a/N + b/N^2 on the finest triple
        const double f3 =
            (8.0 * v[m - 1] - 6.0 * v[m - 2] + v[m - 3]) / 3.0;
        out.value = f3;
        out.error_est = std::abs(f3 - f2);
        const double r1 = std::abs(v[m - 2] - f3);
        const double r2 = std::abs(v[m - 1] - f3);
        out.converged = r2 <= r1 + 1e-18;
    } else {
        out.value = f2;
        out.error_est = std::abs(f2 - v[m - 1]);
    }
    return out;
}

} // namespace pflow
