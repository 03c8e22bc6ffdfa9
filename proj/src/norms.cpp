#include "pflow/norms.hpp"

#include <algorithm>
#include <cmath>

namespace pflow {

double tree_length(const Lattice& l, std::span<const std::int64_t> pts)
{
    const std::size_t r = pts.size();
    if (r <= 1)
        return 0.0;
    if (r == 2)
        return l.distance(pts[0], pts[1]);
    // Prim
    std::vector<bool> used(r, false);
    std::vector<double> key(r, 1e300);
    used[0] = true;
    for (std::size_t i = 1; i < r; ++i)
        key[i] = l.distance(pts[0], pts[i]);
    double total = 0.0;
    for (std::size_t step = 1; step < r; ++step) {
        std::size_t best = 0;
        double bv = 1e300;
        for (std::size_t i = 0; i < r; ++i)
            if (!used[i] && key[i] < bv) {
                bv = key[i];
                best = i;
            }
        used[best] = true;
        total += bv;
        for (std::size_t i = 0; i < r; ++i)
            if (!used[i])
                key[i] = std::min(key[i], l.distance(pts[best], pts[i]));
    }
    return total;
}

double kernel_norm(const PointKernel& f, double mass)
{
    if (f.entries.empty())
        return 0.0;
    const double volw = std::pow(f.lat.cell_volume(), f.arity - 1);
    double best = 0.0;
    // group entries by (pin slot, pin point)
    for (int pin = 0; pin < f.arity; ++pin) {
        std::map<std::int64_t, double> sums;
        for (const auto& [pts, v] : f.entries) {
            const double w =
                std::abs(v) *
                std::exp(mass * tree_length(f.lat, std::span(pts.data(), pts.size())));
            sums[pts[pin]] += w;
        }
        for (const auto& [u, s] : sums)
            best = std::max(best, volw * s);
    }
    return best;
}

double kernel_norm(const QuarticKernel& V, double mass)
{
    const Lattice& l = V.lattice();
    const double vol3 = std::pow(l.cell_volume(), 3);
    // translation invariance: the pinned sum is independent of the pin, and
    // by the stored u1<->u3 / u2<->u4 symmetry all four pins agree
    double s = 0.0;
    for (const auto& [key, v] : V.entries()) {
        std::array<std::int64_t, 4> pts;
        pts[0] = 0;
        for (int i = 0; i < 3; ++i)
            pts[i + 1] = l.index_of({key[4 * i], key[4 * i + 1], key[4 * i + 2],
                                     key[4 * i + 3]});
        s += std::abs(v) * std::exp(mass * tree_length(l, pts));
    }
    return vol3 * s;
}

double series_norm(const SeriesKernelSet& F, double mass,
                   std::span<const double> weights)
{
    if (static_cast<int>(weights.size()) != F.num_fields)
        throw ConfigError("series_norm: weight count mismatch");
    double total = 0.0;
    for (const auto& [deg, ker] : F.by_degree) {
        double w = 1.0;
        for (int i = 0; i < F.num_fields; ++i)
            w *= std::pow(weights[i], deg[i]);
        total += kernel_norm(ker, mass) * w;
    }
    return total;
}

double fieldmap_norm(const FieldMapKernel& A, double mass,
                     std::span<const double> weights)
{
    if (static_cast<int>(weights.size()) != A.num_fields)
        throw ConfigError("fieldmap_norm: weight count mismatch");
    double total = 0.0;
    std::vector<std::int64_t> tuple;
    for (const auto& [deg, entries] : A.by_degree) {
        int rtot = 0;
        double kw = 1.0;
        for (int i = 0; i < A.num_fields; ++i) {
            rtot += deg[i];
            kw *= std::pow(weights[i], deg[i]);
        }
        if (rtot == 0)
            continue;
        const double volw = std::pow(A.domX.cell_volume(), rtot);

        auto weight_of = [&](const FieldMapKernel::Entry& e) {
            tuple.clear();
            tuple.push_back(e.y);
            for (const auto& blk : e.args)
                tuple.insert(tuple.end(), blk.begin(), blk.end());
            // tau over (y, x...) in the common embedding lattice; dom and cod
            // share the metric of the finer of the two
            return std::abs(e.v) *
                   std::exp(mass * tree_length(A.domX,
                                               std::span(tuple.data(), tuple.size())));
        };

        // L: pin the output point
        std::map<std::int64_t, double> lsum;
        for (const auto& e : entries)
            lsum[e.y] += weight_of(e);
        double lq = 0.0;
        for (const auto& [y, s] : lsum)
            lq = std::max(lq, volw * s);

        // R: pin one input point, vol-sum over outputs
        double rq = 0.0;
        {
            // slot index is (field block, position)
            std::map<std::pair<int, std::int64_t>, double> rsum;
            for (const auto& e : entries) {
                const double w = weight_of(e);
                for (std::size_t b = 0; b < e.args.size(); ++b)
                    for (const auto x : e.args[b])
                        rsum[{static_cast<int>(b), x}] += w;
            }
            const double fac = A.codY.cell_volume() *
                               std::pow(A.domX.cell_volume(), rtot - 1);
            for (const auto& [k, s] : rsum)
                rq = std::max(rq, fac * s);
        }
        total += kw * std::max(lq, rq);
    }
    return total;
}

double operator_norm(const LinOp& A, double mass,
                     std::span<const std::int64_t> dom_pins,
                     std::span<const std::int64_t> cod_pins)
{
    std::vector<std::int64_t> all_dom, all_cod;
    if (dom_pins.empty()) {
        all_dom.resize(A.dom.num_points());
        for (std::int64_t i = 0; i < A.dom.num_points(); ++i)
            all_dom[i] = i;
        dom_pins = all_dom;
    }
    if (cod_pins.empty()) {
        all_cod.resize(A.cod.num_points());
        for (std::int64_t i = 0; i < A.cod.num_points(); ++i)
            all_cod[i] = i;
        cod_pins = all_cod;
    }

    double colmax = 0.0;
    for (const auto x : dom_pins) {
        const Field col = A.kernel_column(x);
        double s = 0.0;
        for (std::int64_t y = 0; y < col.size(); ++y)
            s += A.cod.cell_volume() * std::abs(col.v[y]) *
                 std::exp(mass * distance_between(A.cod, y, A.dom, x));
        colmax = std::max(colmax, s);
    }
    double rowmax = 0.0;
    for (const auto y : cod_pins) {
        const Field row = A.kernel_row(y);
        double s = 0.0;
        for (std::int64_t x = 0; x < row.size(); ++x)
            s += A.dom.cell_volume() * std::abs(row.v[x]) *
                 std::exp(mass * distance_between(A.cod, y, A.dom, x));
        rowmax = std::max(rowmax, s);
    }
    return std::max(colmax, rowmax);
}

} // namespace pflow
