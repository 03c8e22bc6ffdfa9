#include "pflow/flow_params.hpp"

#include <cmath>

namespace pflow {

FlowParams derive_params(const FlowInputs& in)
{
    if (in.v0 <= 0 || in.v0 >= 1 || in.eps <= 0 || in.eps >= 0.1)
        throw ConfigError("flow: need 0 < v0 < 1 and 0 < eps < 0.1");
    if (in.mustar < 0)
        throw ConfigError("flow: mustar must be nonnegative");
    const double gap = in.mu0 - in.mustar;
    if (gap <= 0)
        throw ConfigError("flow: mu0 must exceed mustar");
    if (gap < std::pow(in.v0, 4.0 / 3 - 16 * in.eps))
        throw ConfigError(
            "flow: window violated, mustar + v0^{4/3-16eps} <= mu0 fails");
    if (in.mu0 > std::pow(in.v0, 8.0 / 9 + in.eps))
        throw ConfigError("flow: window violated, mu0 <= v0^{8/9+eps} fails");

    FlowParams fp;
    fp.in = in;
    fp.log_v0 = std::log(in.v0);
    fp.log_gap = std::log(gap);
    fp.log_L = std::log(static_cast<double>(in.L));
    fp.ratio = fp.log_v0 / fp.log_gap;
    fp.eta = 0.5 + fp.ratio / 3.0;
    fp.eta_p = 1.5 - fp.ratio - in.eps;
    fp.eta_fl = (2.0 / 3 - 4 * in.eps) * fp.ratio;

    // exponent windows
    auto window = [](double lo, double x, double hi, const char* what) {
        if (!(lo < x && x < hi))
            throw ConfigError(std::string("flow: exponent window violated for ") +
                              what);
    };
    window(0.75 + 8 * in.eps, fp.ratio, 9.0 / 8 - in.eps,
           "log v0 / log(mu0 - mustar)");
    window(0.75 + 2 * in.eps, fp.eta, 7.0 / 8 - in.eps / 3, "eta");
    window(3.0 / 8, fp.eta_p, 0.75 - 8 * in.eps, "eta'");

    // largest n with L^{(2+5 eps) n} (mu0 - mustar) <= v0^{5 eps}
    const double bound = (5 * in.eps * fp.log_v0 - fp.log_gap) /
                         ((2 + 5 * in.eps) * fp.log_L);
    fp.n_p = static_cast<int>(std::floor(bound + 1e-12));
    if (fp.n_p < 0)
        throw ConfigError("flow: no admissible steps, n_p < 0");
    return fp;
}

TypeVector type_of(PKind p)
{
    switch (p) {
    case PKind::p110: return {1, 1, 0};
    case PKind::p011: return {0, 1, 1};
    case PKind::p002: return {0, 0, 2};
    case PKind::p600: return {6, 0, 0};
    }
    return {};
}

std::string name_of(PKind p)
{
    const TypeVector t = type_of(p);
    return "(" + std::to_string(t.p_u) + "," + std::to_string(t.p_0) + "," +
           std::to_string(t.p_sp) + ")";
}

double r_p0(const FlowParams& fp, PKind p)
{
    return p == PKind::p600 ? std::pow(fp.in.v0, 2 - fp.in.eps)
                            : std::pow(fp.in.v0, 1 - 4 * fp.in.eps);
}

double pi_product(const FlowParams& fp, int ell, int n, double C)
{
    double log_pi = 0.0;
    const int cap = n >= 0 ? n : std::max(fp.n_p, 8) + 512;
    for (int j = ell + 1; j <= cap; ++j) {
        const double term =
            C * std::exp(fp.log_e_fl(j - 1) - 2 * fp.log_kappa(j));
        log_pi += std::log1p(term);
        if (n < 0 && term < 1e-18)
            break;
    }
    return std::exp(log_pi);
}

namespace {

// kappa^p(n) = kappa(n)^{p_u} kappa'(n)^{p_0 + p_sp}
double log_kappa_p_vec(const FlowParams& fp, PKind p, int n)
{
    const TypeVector t = type_of(p);
    return t.p_u * fp.log_kappa(n) + (t.p_0 + t.p_sp) * fp.log_kappa_p(n);
}

} // namespace

double r_p_recursion(const FlowParams& fp, PKind p, int n, double C)
{
    if (n == 0)
        return r_p0(fp, p);
    const double L = static_cast<double>(fp.in.L);
    auto sum_with = [&](auto&& weight) {
        double s = 0.0;
        for (int ell = 1; ell <= n; ++ell)
            s += weight(ell) * pi_product(fp, ell, n, C);
        return s;
    };
    switch (p) {
    case PKind::p110:
        return pi_product(fp, 0, n, C) * r_p0(fp, p) +
               C * sum_with([&](int ell) {
                   return std::exp(fp.log_e_fl(ell - 1) - fp.log_kappa(ell) -
                                   fp.log_kappa_p(ell));
               });
    case PKind::p011:
        return std::pow(L, -n) * pi_product(fp, 0, n, C) * r_p0(fp, p) +
               C * std::pow(L, -n) * sum_with([&](int ell) {
                   return std::pow(L, ell) *
                          std::exp(fp.log_e_fl(ell - 1) - 2 * fp.log_kappa_p(ell));
               });
    case PKind::p002:
        return pi_product(fp, 0, n, C) * r_p0(fp, p) +
               C * sum_with([&](int ell) {
                   return std::exp(fp.log_e_fl(ell - 1) - 2 * fp.log_kappa_p(ell));
               });
    case PKind::p600:
        return std::pow(L, -4.0 * n) * pi_product(fp, 0, n, C) * r_p0(fp, p) +
               C * std::pow(L, -4.0 * n) * sum_with([&](int ell) {
                   return std::pow(L, 4.0 * ell) *
                          std::exp(fp.log_e_fl(ell - 1) - 6 * fp.log_kappa(ell));
               });
    }
    return 0.0;
}

double r_p_closed(const FlowParams& fp, PKind p, int n, double C)
{
    if (n == 0)
        return r_p0(fp, p);
    const double decay = 5.0 - type_of(p).delta();
    double s = r_p0(fp, p) * std::exp(decay * n * fp.log_L) *
               pi_product(fp, 0, n, C);
    for (int ell = 1; ell <= n; ++ell)
        s += C * std::exp(decay * (n - ell) * fp.log_L) *
             std::exp(fp.log_e_fl(ell - 1) - log_kappa_p_vec(fp, p, ell)) *
             pi_product(fp, ell, n, C);
    return s;
}

double r_p_formulation_gap(const FlowParams& fp, double C)
{
    double worst = 0.0;
    for (const PKind p : all_pkinds)
        for (int n = 0; n <= fp.n_p; ++n) {
            const double a = r_p_recursion(fp, p, n, C);
            const double b = r_p_closed(fp, p, n, C);
            worst = std::max(worst, std::abs(a - b) / std::max(a, b));
        }
    return worst;
}

double mu_n_star(int n, const FlowParams& fp, const QuarticKernel& V0,
                 const LatticeSpec& base, double a, const AveragingProfile& prof,
                 const KineticSpec& kin)
{
    const double L2n = std::pow(static_cast<double>(base.L), 2.0 * n);
    if (n == 0)
        return fp.in.mu0;

    LatticeSpec s = base;
    s.j = n;
    s.n = 0;
    const Lattice Xn(s);
    s.j = 0;
    s.n = n;
    const Lattice X0n(s);
    const GreensOp S(Xn, X0n, prof, kin, n, a, cplx{});
    const QuarticKernel Vn = V0.rescaled(n);

    // trace field g(o) = sum_{u} S_n(u + o, u) * vol_n, from the exact
    // momentum diagonal of the inverse
    Field diag(Xn, S.class_op().inverse_diagonal());
    fft4(Xn.dims(), diag.v, true);
    // inverse FFT divides by |X|; Sum_k Shat(k,k) e^{i k o} = |X| * ifft
    const double npts = static_cast<double>(Xn.num_points());
    const double voln = Xn.cell_volume();

    cplx contracted{};
    for (const auto& [key, v] : Vn.entries()) {
        const std::array<std::int64_t, 4> o4{key[8], key[9], key[10], key[11]};
        contracted += v * npts * diag.v[Xn.index_of(o4)];
    }
    // kernel convention: S_n(y,x) = matrix / vol_n; measure vol_n^4;
    // normalize by |X_0^{(n)}|
    const double x0n = static_cast<double>(X0n.num_points());
    const cplx sub = 2.0 / x0n * std::pow(voln, 4.0) * contracted / voln;
    if (std::abs(sub.imag()) > 1e-10 * std::max(1.0, std::abs(sub)))
        throw SolverError("mu_n_star: non-real subtraction");
    return L2n * fp.in.mu0 - sub.real();
}

namespace {

void push(std::vector<IneqRow>& rows, std::string name, int n, double lhs,
          double rhs)
{
    IneqRow r;
    r.name = std::move(name);
    r.n = n;
    r.lhs = lhs;
    r.rhs = rhs;
    r.margin = lhs > 0 ? rhs / lhs : std::numeric_limits<double>::infinity();
    r.pass = lhs <= rhs;
    rows.push_back(std::move(r));
}

} // namespace

std::vector<IneqRow> verify_parameter_inequalities(const FlowParams& fp,
                                                   double C)
{
    std::vector<IneqRow> rows;
    const double v0 = fp.in.v0, eps = fp.in.eps;
    const double L = static_cast<double>(fp.in.L);
    const double gap = fp.gap();
    auto v0p = [&](double e) { return std::pow(v0, e); };
    auto Lp = [&](double e) { return std::pow(L, e); };

    // exponent windows: two-sided, so the margin is the slack relative to the
    // window width (1 + min-slack/width)
    auto push_window = [&](std::string name, double lo, double x, double hi) {
        IneqRow r;
        r.name = std::move(name);
        r.lhs = lo;
        r.rhs = hi;
        r.pass = lo < x && x < hi;
        r.margin = 1.0 + std::min(x - lo, hi - x) / (hi - lo);
        rows.push_back(std::move(r));
    };
    push_window("window: 3/4+8eps < ratio < 9/8-eps", 0.75 + 8 * eps, fp.ratio,
                9.0 / 8 - eps);
    push_window("window: 3/4+2eps < eta < 7/8-eps/3", 0.75 + 2 * eps, fp.eta,
                7.0 / 8 - eps / 3);
    push_window("window: 3/8 < eta' < 3/4-8eps", 3.0 / 8, fp.eta_p,
                0.75 - 8 * eps);
    push(rows, "window: L^{n_p} <= v0^{-(2/3-8eps)}", fp.n_p, Lp(fp.n_p),
         v0p(-(2.0 / 3 - 8 * eps)));

    // step-count bound
    push(rows, "ineq 1a: L^{n_p} <= (v0^{5eps}/gap)^{1/(2+5eps)}", fp.n_p,
         Lp(fp.n_p), std::pow(v0p(5 * eps) / gap, 1.0 / (2 + 5 * eps)));

    // fluctuation weight bounds
    for (int n = 0; n <= fp.n_p; ++n) {
        push(rows, "ineq 1b: e_fl(n) <= v0^{3eps/2}", n, fp.e_fl(n),
             v0p(1.5 * eps));
        push(rows, "ineq 1b: (v0/L^n) kappa^2 kappa_fl^2 <= v0^{eps/6} e_fl", n,
             v0 * Lp(-n) * std::exp(2 * fp.log_kappa(n) + 2 * fp.log_kappa_fl(n)),
             v0p(eps / 6) * fp.e_fl(n));
    }

    // monotonicity and bound of kappa_fl/(kappa' e_fl); the n = 0 bound is
    // an equality by construction and carries no margin
    for (int n = 0; n <= fp.n_p; ++n) {
        const double q =
            std::exp(fp.log_kappa_fl(n) - fp.log_kappa_p(n) - fp.log_e_fl(n));
        if (n > 0)
            push(rows, "ineq 1c: kappa_fl/(kappa' e_fl) <= v0^{eps/2}", n, q,
                 v0p(eps / 2));
        if (n > 0) {
            const double prev = std::exp(fp.log_kappa_fl(n - 1) -
                                         fp.log_kappa_p(n - 1) -
                                         fp.log_e_fl(n - 1));
            push(rows, "ineq 1c: monotone decreasing", n, q, prev);
        }
    }

    // decay of the low-degree sizes
    const double pinf = pi_product(fp, 0, -1, C);
    for (const PKind p : all_pkinds)
        for (int n = 1; n <= fp.n_p; ++n) {
            double shape = 1.0;
            if (p == PKind::p011)
                shape = Lp(-(2 * fp.eta_p - fp.eta_fl) * n);
            else if (p == PKind::p600)
                shape = v0 * Lp(-4.0 * n);
            push(rows, "ineq 1d: r_p(n,C) bound, p=" + name_of(p), n,
                 r_p_recursion(fp, p, n, C),
                 (1 + C) * pinf * v0p(1 - 5 * eps) * shape);
        }

    // smallness hypothesis: eps |log v0| >= 2 log((1+C) Pi_inf(C))
    push(rows, "ineq 2 hypothesis: eps|log v0| >= 2 log((1+C)Pi)", 0,
         2 * std::log((1 + C) * pinf), eps * std::abs(fp.log_v0));

    // weighted size bounds
    for (const PKind p : all_pkinds)
        for (int n = 1; n <= fp.n_p; ++n) {
            const double rp = r_p_recursion(fp, p, n, C);
            push(rows, "ineq 2a: kappa^p/kappa^2 r_p <= v0^{2/3-3eps/2}, p=" +
                           name_of(p),
                 n, std::exp(log_kappa_p_vec(fp, p, n) - 2 * fp.log_kappa(n)) * rp,
                 v0p(2.0 / 3 - 1.5 * eps));
            if (p != PKind::p600)
                push(rows,
                     "ineq 2a: (kf/k') kappa^p r_p <= v0^{1/8} e_fl, p=" + name_of(p),
                     n,
                     std::exp(fp.log_kappa_fl(n) - fp.log_kappa_p(n) +
                              log_kappa_p_vec(fp, p, n)) *
                         rp,
                     v0p(1.0 / 8) * fp.e_fl(n));
            else
                push(rows, "ineq 2a: (kf/k) kappa^p r_p <= v0^{eps} e_fl, p=(6,0,0)",
                     n,
                     std::exp(fp.log_kappa_fl(n) - fp.log_kappa(n) +
                              log_kappa_p_vec(fp, p, n)) *
                         rp,
                     v0p(eps) * fp.e_fl(n));
        }

    // absolute size bounds
    for (const PKind p : all_pkinds)
        for (int n = 1; n <= fp.n_p; ++n) {
            const double cap = std::min(v0p(4.0 / 3 - 7 * eps), v0 * Lp(-n));
            const double shape =
                p == PKind::p600
                    ? std::exp(-2 * fp.log_kappa_fl(n))
                    : std::exp(fp.log_kappa(n) + fp.log_kappa_fl(n));
            push(rows, "ineq 2b: r_p(n,C) small, p=" + name_of(p), n,
                 r_p_recursion(fp, p, n, C), v0p(eps) * cap * shape);
        }

    // summed drift bounds at every n (the sums grow with n)
    for (int n = 1; n <= fp.n_p; ++n) {
        double s = 0.0;
        for (int ell = 1; ell <= n; ++ell)
            s += Lp(-(2 - 3 * eps) * ell) *
                 (v0p(1.0 / 3 - 6 * eps) + Lp(2.0 * ell) * gap);
        push(rows, "ineq 3a: v0^{1-8eps} sum <= (1/2) v0^{4/3-15eps}", n,
             v0p(1 - 8 * eps) * s, 0.5 * v0p(4.0 / 3 - 15 * eps));

        double s2 = 0.0;
        for (int ell = 1; ell <= n; ++ell)
            s2 += Lp(ell) * std::exp(fp.log_e_fl(ell - 1) - 4 * fp.log_kappa(ell));
        push(rows, "ineq 3b: sum L^l e_fl/kappa^4 <= v0^{5/3-6eps}", n, s2,
             v0p(5.0 / 3 - 6 * eps));
    }

    // chemical-potential drift: with the input |mu_n^* - L^{2n} gap| <=
    // v0^{1-eps} and mu at the extreme of the hypothesis window; the
    // v0^{1-eps} term is common to both sides, so the margin is measured on
    // the rest
    for (int n = 1; n <= fp.n_p; ++n) {
        double s = 0.0;
        for (int ell = 1; ell <= n; ++ell)
            s += Lp(-(2 - 3 * eps) * ell) *
                 (v0p(1.0 / 3 - 6 * eps) + Lp(2.0 * ell) * gap);
        push(rows, "ineq 4a: |mu - L^{2n} gap| bound", n,
             Lp(2.0 * n) * v0p(1 - 8 * eps) * s,
             Lp(2.0 * n) * v0p(4.0 / 3 - 15 * eps));
        push(rows, "ineq 4a: |mu| <= 4 min{v0^{5eps}, L^{2n} v0^{8/9+eps}}", n,
             2 * Lp(2.0 * n) * gap + v0p(1 - eps),
             4 * std::min(v0p(5 * eps), Lp(2.0 * n) * v0p(8.0 / 9 + eps)));
    }

    // interpolation bounds (alpha = 1 is an identity and carries no margin;
    // it is omitted)
    for (int n = 0; n <= fp.n_p; ++n) {
        const double lhs = Lp(2.0 * n) * gap;
        for (const double al : {0.0, 0.25, 0.5, 0.75})
            push(rows, "ineq 5a: alpha=" + std::to_string(al), n, lhs,
                 Lp(2 * al * n) * v0p(5 * eps * (1 - al)) * std::pow(gap, al));
        push(rows, "ineq 5b: L^{2n} gap <= min{v0^{5eps}, L^{2n} v0^{8/9+eps}}", n,
             lhs, std::min(v0p(5 * eps), Lp(2.0 * n) * v0p(8.0 / 9 + eps)));
        push(rows, "ineq 5c: L^{2n} gap <= v0^{1+eps} kappa^2 / L^n", n, lhs,
             v0p(1 + eps) * Lp(-n) * std::exp(2 * fp.log_kappa(n)));
        push(rows, "ineq 5d: L^{2n} gap kappa_fl^2 <= v0^{eps} e_fl", n,
             lhs * std::exp(2 * fp.log_kappa_fl(n)), v0p(eps) * fp.e_fl(n));
    }

    return rows;
}

} // namespace pflow
