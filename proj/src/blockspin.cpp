#include "pflow/blockspin.hpp"

#include <cmath>
#include <numbers>

namespace pflow {

namespace {

std::vector<double> box_self_convolution(std::int64_t width, int times)
{
    std::vector<double> w(width, 1.0);
    for (int t = 1; t < times; ++t) {
        std::vector<double> nw(w.size() + width - 1, 0.0);
        for (std::size_t i = 0; i < w.size(); ++i)
            for (std::int64_t b = 0; b < width; ++b)
                nw[i + b] += w[i];
        w = std::move(nw);
    }
    const double norm = std::pow(static_cast<double>(width), times);
    for (auto& x : w)
        x /= norm;
    return w;
}

} // namespace

AveragingProfile build_profile(int q_exp, std::int64_t L)
{
    if (q_exp < 4 || q_exp % 2 != 0)
        throw ConfigError("profile: q must be even and >= 4");
    AveragingProfile p;
    p.q_exp = q_exp;
    p.L = L;
    p.wt = box_self_convolution(L * L, q_exp);
    p.ws = box_self_convolution(L, q_exp);
    return p;
}

double AveragingProfile::at(const std::array<std::int64_t, 4>& x) const
{
    const std::int64_t ht = half_time(), hs = half_space();
    if (std::llabs(x[0]) > ht)
        return 0.0;
    double v = wt[x[0] + ht];
    for (int a = 1; a < 4; ++a) {
        if (std::llabs(x[a]) > hs)
            return 0.0;
        v *= ws[x[a] + hs];
    }
    return v;
}

double AveragingProfile::total_mass() const
{
    double st = 0.0, ss = 0.0;
    for (double x : wt)
        st += x;
    for (double x : ws)
        ss += x;
    return st * ss * ss * ss;
}

double AveragingProfile::hat_axis(double box_width, std::int64_t kappa,
                                  std::int64_t N) const
{
    if (kappa % N == 0)
        return 1.0;
    const double k = 2.0 * std::numbers::pi * static_cast<double>(kappa) / N;
    const double dir = std::sin(box_width * k / 2.0) / std::sin(k / 2.0);
    return std::pow(dir / box_width, q_exp);
}

double AveragingProfile::hat_time(std::int64_t kappa, std::int64_t N) const
{
    return hat_axis(static_cast<double>(L * L), kappa, N);
}

double AveragingProfile::hat_space(std::int64_t kappa, std::int64_t N) const
{
    return hat_axis(static_cast<double>(L), kappa, N);
}

std::vector<double> profile_hat_table(const AveragingProfile& p, const Lattice& l)
{
    const auto& d = l.dims();
    std::vector<double> t0(d[0]), t1(d[1]), t2(d[2]), t3(d[3]);
    for (std::int64_t k = 0; k < d[0]; ++k)
        t0[k] = p.hat_time(k, d[0]);
    for (std::int64_t k = 0; k < d[1]; ++k)
        t1[k] = t2[k] = t3[k] = p.hat_space(k, d[1]);
    std::vector<double> out(l.num_points());
    std::int64_t i = 0;
    for (std::int64_t a = 0; a < d[0]; ++a)
        for (std::int64_t b = 0; b < d[1]; ++b)
            for (std::int64_t c = 0; c < d[2]; ++c)
                for (std::int64_t e = 0; e < d[3]; ++e)
                    out[i++] = t0[a] * t1[b] * t2[c] * t3[e];
    return out;
}

namespace {

Lattice avg_codomain(const Lattice& dom)
{
    LatticeSpec s = dom.spec();
    s.j -= 1;
    s.n += 1;
    return Lattice(s);
}

std::array<std::int64_t, 4> subsample_dims(const std::array<std::int64_t, 4>& d,
                                           std::int64_t L)
{
    return {d[0] / (L * L), d[1] / L, d[2] / L, d[3] / L};
}

// raw index-grid averaging step: convolve with q (via its exact momentum
// table), then pick values on the (L^2,L,L,L) sublattice
std::vector<cplx> avg_step_raw(const AveragingProfile& p,
                               const std::array<std::int64_t, 4>& d,
                               std::vector<cplx> data)
{
    std::vector<double> t0(d[0]), ts(d[1]);
    for (std::int64_t k = 0; k < d[0]; ++k)
        t0[k] = p.hat_time(k, d[0]);
    for (std::int64_t k = 0; k < d[1]; ++k)
        ts[k] = p.hat_space(k, d[1]);

    fft4(d, data, false);
    std::int64_t i = 0;
    for (std::int64_t a = 0; a < d[0]; ++a)
        for (std::int64_t b = 0; b < d[1]; ++b)
            for (std::int64_t c = 0; c < d[2]; ++c)
                for (std::int64_t e = 0; e < d[3]; ++e)
                    data[i++] *= t0[a] * ts[b] * ts[c] * ts[e];
    fft4(d, data, true);

    const auto cd = subsample_dims(d, p.L);
    std::vector<cplx> out(cd[0] * cd[1] * cd[2] * cd[3]);
    const std::int64_t L = p.L;
    std::int64_t o = 0;
    for (std::int64_t a = 0; a < cd[0]; ++a)
        for (std::int64_t b = 0; b < cd[1]; ++b)
            for (std::int64_t c = 0; c < cd[2]; ++c)
                for (std::int64_t e = 0; e < cd[3]; ++e)
                    out[o++] = data[((a * L * L * d[1] + b * L) * d[2] + c * L) * d[3] + e * L];
    return out;
}

// transpose of avg_step_raw including the L^5 volume ratio
std::vector<cplx> avg_step_raw_T(const AveragingProfile& p,
                                 const std::array<std::int64_t, 4>& d,
                                 const std::vector<cplx>& coarse)
{
    const auto cd = subsample_dims(d, p.L);
    std::vector<cplx> data(d[0] * d[1] * d[2] * d[3], cplx{});
    const std::int64_t L = p.L;
    std::int64_t o = 0;
    for (std::int64_t a = 0; a < cd[0]; ++a)
        for (std::int64_t b = 0; b < cd[1]; ++b)
            for (std::int64_t c = 0; c < cd[2]; ++c)
                for (std::int64_t e = 0; e < cd[3]; ++e)
                    data[((a * L * L * d[1] + b * L) * d[2] + c * L) * d[3] + e * L] =
                        coarse[o++];

    std::vector<double> t0(d[0]), ts(d[1]);
    for (std::int64_t k = 0; k < d[0]; ++k)
        t0[k] = p.hat_time(k, d[0]);
    for (std::int64_t k = 0; k < d[1]; ++k)
        ts[k] = p.hat_space(k, d[1]);

    fft4(d, data, false);
    const double l5 = std::pow(static_cast<double>(L), 5.0);
    std::int64_t i = 0;
    for (std::int64_t a = 0; a < d[0]; ++a)
        for (std::int64_t b = 0; b < d[1]; ++b)
            for (std::int64_t c = 0; c < d[2]; ++c)
                for (std::int64_t e = 0; e < d[3]; ++e)
                    data[i++] *= l5 * t0[a] * ts[b] * ts[c] * ts[e];
    fft4(d, data, true);
    return data;
}

} // namespace

LinOp avg_op(const AveragingProfile& p, const Lattice& dom)
{
    const Lattice cod = avg_codomain(dom);
    auto fwd = [p, dom, cod](const Field& f) {
        return Field(cod, avg_step_raw(p, dom.dims(), f.v));
    };
    auto trn = [p, dom](const Field& g) {
        return Field(dom, avg_step_raw_T(p, dom.dims(), g.v));
    };
    return {dom, cod, std::move(fwd), std::move(trn)};
}

LinOp avg_chain(const AveragingProfile& p, const Lattice& fine, int steps)
{
    if (steps < 0)
        throw ConfigError("avg_chain: negative step count");
    LatticeSpec cs = fine.spec();
    cs.j -= steps;
    cs.n += steps;
    const Lattice cod(cs);

    auto fwd = [p, fine, cod, steps](const Field& f) {
        std::vector<cplx> data = f.v;
        auto d = fine.dims();
        for (int s = 0; s < steps; ++s) {
            data = avg_step_raw(p, d, std::move(data));
            d = subsample_dims(d, p.L);
        }
        return Field(cod, std::move(data));
    };
    auto trn = [p, fine, steps](const Field& g) {
        // grids from coarse back to fine
        std::vector<std::array<std::int64_t, 4>> grids(steps + 1);
        grids[0] = fine.dims();
        for (int s = 0; s < steps; ++s)
            grids[s + 1] = subsample_dims(grids[s], p.L);
        std::vector<cplx> data = g.v;
        for (int s = steps - 1; s >= 0; --s)
            data = avg_step_raw_T(p, grids[s], data);
        return Field(fine, std::move(data));
    };
    return {fine, cod, std::move(fwd), std::move(trn)};
}

std::array<std::int64_t, 4> chain_coarse_dims(const Lattice& fine, int steps)
{
    auto d = fine.dims();
    const std::int64_t L = fine.spec().L;
    for (int s = 0; s < steps; ++s)
        d = subsample_dims(d, L);
    return d;
}

std::vector<double> avg_chain_alpha(const AveragingProfile& p,
                                    const Lattice& fine, int steps)
{
    const auto& d = fine.dims();
    // per-axis chain transforms
    auto axis_chain = [&](std::int64_t N, std::int64_t ratio, bool time) {
        std::vector<double> t(N, 1.0);
        for (std::int64_t k = 0; k < N; ++k) {
            std::int64_t kc = k;
            std::int64_t Nc = N;
            for (int s = 0; s < steps; ++s) {
                t[k] *= time ? p.hat_time(kc, Nc) : p.hat_space(kc, Nc);
                Nc /= ratio;
                kc %= Nc;
            }
        }
        return t;
    };
    const auto t0 = axis_chain(d[0], p.L * p.L, true);
    const auto ts = axis_chain(d[1], p.L, false);
    std::vector<double> out(fine.num_points());
    std::int64_t i = 0;
    for (std::int64_t a = 0; a < d[0]; ++a)
        for (std::int64_t b = 0; b < d[1]; ++b)
            for (std::int64_t c = 0; c < d[2]; ++c)
                for (std::int64_t e = 0; e < d[3]; ++e)
                    out[i++] = t0[a] * ts[b] * ts[c] * ts[e];
    return out;
}

std::vector<double> quad_coupling_table(const AveragingProfile& p,
                                        const Lattice& unit, int n, double a)
{
    if (n < 1)
        throw ConfigError("quad_coupling: n must be >= 1");
    std::vector<double> table(unit.num_points(), a);
    if (n == 1)
        return table;

    // inner operator 1 + sum_{j=1}^{n-1} L^{-2j} Q_j Q_j^T applied to a delta
    Field acc = delta_field(unit, 0);
    const Field del = acc;
    for (int j = 1; j <= n - 1; ++j) {
        LatticeSpec fs = unit.spec();
        fs.j = j;
        fs.n = unit.spec().n - j;
        const Lattice Xj(fs);
        const LinOp Qj = avg_chain(p, Xj, j);
        const double w = std::pow(static_cast<double>(unit.spec().L), -2.0 * j);
        acc += w * Qj.apply(Qj.apply_transpose(del));
    }
    acc *= unit.cell_volume();
    fft4(unit.dims(), acc.v, false);
    for (std::int64_t i = 0; i < unit.num_points(); ++i) {
        const cplx m = acc.v[i];
        if (std::abs(m.imag()) > 1e-12 * std::abs(m))
            throw SolverError("quad_coupling: multiplier not real");
        if (m.real() < 1.0 - 1e-9)
            throw SolverError("quad_coupling: multiplier below one");
        table[i] = a / m.real();
    }
    return table;
}

LinOp real_multiplier_op(const Lattice& l, const std::vector<double>& table)
{
    std::vector<cplx> m(table.size());
    for (std::size_t i = 0; i < table.size(); ++i)
        m[i] = table[i];
    return multiplier_op(l, std::move(m));
}

// ---------------------------------------------------------------------------

ClassStructure::ClassStructure(const Lattice& fine,
                               const std::array<std::int64_t, 4>& cdims)
    : fine_(fine), cdims_(cdims)
{
    const auto& fd = fine.dims();
    std::array<std::int64_t, 4> ratio{};
    for (int a = 0; a < 4; ++a) {
        if (fd[a] % cdims[a] != 0)
            throw ConfigError("fold classes: dims do not divide");
        ratio[a] = fd[a] / cdims[a];
    }
    nclasses_ = cdims[0] * cdims[1] * cdims[2] * cdims[3];
    csize_ = ratio[0] * ratio[1] * ratio[2] * ratio[3];
    members_.resize(nclasses_);
    std::int64_t c = 0;
    for (std::int64_t a = 0; a < cdims[0]; ++a)
        for (std::int64_t b = 0; b < cdims[1]; ++b)
            for (std::int64_t g = 0; g < cdims[2]; ++g)
                for (std::int64_t e = 0; e < cdims[3]; ++e) {
                    auto& mem = members_[c++];
                    mem.reserve(csize_);
                    for (std::int64_t ta = 0; ta < ratio[0]; ++ta)
                        for (std::int64_t tb = 0; tb < ratio[1]; ++tb)
                            for (std::int64_t tg = 0; tg < ratio[2]; ++tg)
                                for (std::int64_t te = 0; te < ratio[3]; ++te)
                                    mem.push_back(fine.index_of(
                                        {a + cdims[0] * ta, b + cdims[1] * tb,
                                         g + cdims[2] * tg, e + cdims[3] * te}));
                }
}

ClassOp::ClassOp(std::shared_ptr<const ClassStructure> cs, std::vector<cplx> diag,
                 std::vector<double> u, std::vector<cplx> coupling)
    : cs_(std::move(cs)), diag_(std::move(diag)), u_(std::move(u)),
      coupling_(std::move(coupling))
{
    if (static_cast<std::int64_t>(diag_.size()) != cs_->fine().num_points() ||
        u_.size() != diag_.size() ||
        static_cast<std::int64_t>(coupling_.size()) != cs_->num_classes())
        throw ConfigError("class op: table sizes mismatch");
}

Field ClassOp::apply(const Field& f) const
{
    const Lattice& l = cs_->fine();
    Field g = f;
    fft4(l.dims(), g.v, false);
    for (std::int64_t c = 0; c < cs_->num_classes(); ++c) {
        const auto& mem = cs_->members(c);
        cplx s{};
        for (auto k : mem)
            s += u_[k] * g.v[k];
        s *= coupling_[c];
        for (auto k : mem)
            g.v[k] = diag_[k] * g.v[k] + u_[k] * s;
    }
    fft4(l.dims(), g.v, true);
    return g;
}

void ClassOp::solve_class(std::int64_t c, std::vector<cplx>& io) const
{
    const auto& mem = cs_->members(c);
    const std::size_t m = mem.size();
    const cplx cc = coupling_[c];

    // scale for near-singular detection
    double scale = std::abs(cc);
    for (auto k : mem)
        scale = std::max(scale, std::abs(diag_[k]));
    if (scale == 0.0)
        throw SolverError("class solve: zero operator");
    const double tau = 1e-13 * scale;

    // shifted diagonal; collect shifted indices
    std::vector<std::size_t> shifted;
    std::vector<cplx> dinv(m);
    for (std::size_t i = 0; i < m; ++i) {
        cplx d = diag_[mem[i]];
        if (std::abs(d) < tau) {
            shifted.push_back(i);
            d += scale;
        }
        dinv[i] = 1.0 / d;
    }

    // Woodbury for A = Dt + U W U^T with U = [u | e_s1 | ...],
    // W = diag(cc, -scale, ...)
    const std::size_t r = 1 + shifted.size();
    std::vector<cplx> udr(m); // D^{-1} u restricted to class
    for (std::size_t i = 0; i < m; ++i)
        udr[i] = dinv[i] * u_[mem[i]];

    // small matrix M = W^{-1} + U^T D^{-1} U, and rhs projections
    std::vector<cplx> M(r * r, cplx{});
    std::vector<cplx> proj(r, cplx{});
    // column 0 is u, columns 1.. are unit vectors at shifted indices
    auto ucol = [&](std::size_t j, std::size_t i) -> cplx {
        if (j == 0)
            return u_[mem[i]];
        return i == shifted[j - 1] ? cplx{1.0, 0.0} : cplx{};
    };
    for (std::size_t j = 0; j < r; ++j)
        for (std::size_t jj = 0; jj < r; ++jj) {
            cplx s{};
            if (j == 0 && jj == 0) {
                for (std::size_t i = 0; i < m; ++i)
                    s += u_[mem[i]] * udr[i];
            } else if (j == 0) {
                s = u_[mem[shifted[jj - 1]]] * dinv[shifted[jj - 1]];
            } else if (jj == 0) {
                s = udr[shifted[j - 1]];
            } else {
                s = (j == jj) ? dinv[shifted[j - 1]] : cplx{};
            }
            M[j * r + jj] = s;
        }
    M[0] += (std::abs(cc) == 0.0) ? cplx{1e300, 0.0} : 1.0 / cc;
    for (std::size_t j = 1; j < r; ++j)
        M[j * r + j] += -1.0 / scale;

    for (std::size_t j = 0; j < r; ++j) {
        cplx s{};
        for (std::size_t i = 0; i < m; ++i)
            s += ucol(j, i) * dinv[i] * io[i];
        proj[j] = s;
    }

    // tiny dense LU with partial pivoting
    std::vector<std::size_t> piv(r);
    for (std::size_t i = 0; i < r; ++i)
        piv[i] = i;
    for (std::size_t col = 0; col < r; ++col) {
        std::size_t best = col;
        double bv = std::abs(M[piv[col] * r + col]);
        for (std::size_t i = col + 1; i < r; ++i)
            if (std::abs(M[piv[i] * r + col]) > bv) {
                bv = std::abs(M[piv[i] * r + col]);
                best = i;
            }
        std::swap(piv[col], piv[best]);
        const cplx pivot = M[piv[col] * r + col];
        if (std::abs(pivot) == 0.0)
            throw SolverError("class solve: singular Woodbury block");
        for (std::size_t i = col + 1; i < r; ++i) {
            const cplx f = M[piv[i] * r + col] / pivot;
            M[piv[i] * r + col] = f;
            for (std::size_t jj = col + 1; jj < r; ++jj)
                M[piv[i] * r + jj] -= f * M[piv[col] * r + jj];
        }
    }
    std::vector<cplx> y(r);
    for (std::size_t i = 0; i < r; ++i) {
        cplx s = proj[piv[i]];
        for (std::size_t jj = 0; jj < i; ++jj)
            s -= M[piv[i] * r + jj] * y[jj];
        y[i] = s;
    }
    for (std::size_t ii = r; ii-- > 0;) {
        cplx s = y[ii];
        for (std::size_t jj = ii + 1; jj < r; ++jj)
            s -= M[piv[ii] * r + jj] * y[jj];
        y[ii] = s / M[piv[ii] * r + ii];
    }

    // x = D^{-1} rhs - D^{-1} U y
    for (std::size_t i = 0; i < m; ++i) {
        cplx corr = u_[mem[i]] * y[0];
        io[i] = dinv[i] * io[i] - dinv[i] * corr;
    }
    for (std::size_t j = 1; j < r; ++j)
        io[shifted[j - 1]] -= dinv[shifted[j - 1]] * y[j];
}

Field ClassOp::solve(const Field& rhs, double residual_tol) const
{
    const Lattice& l = cs_->fine();
    Field g = rhs;
    fft4(l.dims(), g.v, false);
    std::vector<cplx> scratch;
    for (std::int64_t c = 0; c < cs_->num_classes(); ++c) {
        const auto& mem = cs_->members(c);
        scratch.resize(mem.size());
        for (std::size_t i = 0; i < mem.size(); ++i)
            scratch[i] = g.v[mem[i]];
        solve_class(c, scratch);
        for (std::size_t i = 0; i < mem.size(); ++i)
            g.v[mem[i]] = scratch[i];
    }
    fft4(l.dims(), g.v, true);

    if (residual_tol > 0) {
        const Field back = apply(g);
        double num = 0, den = 0;
        for (std::int64_t i = 0; i < rhs.size(); ++i) {
            num += std::norm(back.v[i] - rhs.v[i]);
            den += std::norm(rhs.v[i]);
        }
        if (den > 0 && std::sqrt(num / den) > residual_tol)
            throw SolverError("class solve: residual " +
                              std::to_string(std::sqrt(num / den)) +
                              " above tolerance");
    }
    return g;
}

Field ClassOp::apply_transpose(const Field& f) const
{
    return flip_field(apply(flip_field(f)));
}

Field ClassOp::solve_transpose(const Field& rhs, double residual_tol) const
{
    return flip_field(solve(flip_field(rhs), residual_tol));
}

LinOp ClassOp::as_linop() const
{
    const Lattice l = cs_->fine();
    auto self = *this;
    return {l, l, [self](const Field& f) { return self.apply(f); },
            [self](const Field& f) { return self.apply_transpose(f); }};
}

LinOp ClassOp::inverse_linop(double residual_tol) const
{
    const Lattice l = cs_->fine();
    auto self = *this;
    return {l, l,
            [self, residual_tol](const Field& f) { return self.solve(f, residual_tol); },
            [self, residual_tol](const Field& f) {
                return self.solve_transpose(f, residual_tol);
            }};
}

std::vector<cplx> ClassOp::quadratic_in_inverse() const
{
    std::vector<cplx> out(cs_->num_classes());
    std::vector<cplx> scratch;
    for (std::int64_t c = 0; c < cs_->num_classes(); ++c) {
        const auto& mem = cs_->members(c);
        scratch.resize(mem.size());
        for (std::size_t i = 0; i < mem.size(); ++i)
            scratch[i] = u_[mem[i]];
        solve_class(c, scratch);
        cplx s{};
        for (std::size_t i = 0; i < mem.size(); ++i)
            s += u_[mem[i]] * scratch[i];
        out[c] = s;
    }
    return out;
}

std::vector<cplx> ClassOp::inverse_diagonal() const
{
    // A^{-1} e_i against e_i, one class solve per unit vector would be m^2;
    // instead solve for the inverse columns per class in one pass
    std::vector<cplx> out(cs_->fine().num_points());
    std::vector<cplx> scratch;
    for (std::int64_t c = 0; c < cs_->num_classes(); ++c) {
        const auto& mem = cs_->members(c);
        const std::size_t m = mem.size();
        for (std::size_t i = 0; i < m; ++i) {
            scratch.assign(m, cplx{});
            scratch[i] = 1.0;
            solve_class(c, scratch);
            out[mem[i]] = scratch[i];
        }
    }
    return out;
}

} // namespace pflow
