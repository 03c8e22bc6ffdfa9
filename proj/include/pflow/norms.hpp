#ifndef PFLOW_NORMS_HPP
#define PFLOW_NORMS_HPP

#include <span>

#include "pflow/linop.hpp"
#include "pflow/quartic.hpp"

namespace pflow {

// Tree length tau(u_1..u_r): total edge length of the minimum spanning tree
// of the points under the torus metric. For r <= 2 this is the exact minimal
// tree; for r >= 3 it upper-bounds the Steiner minimum, so every e^{m tau}
// norm computed here upper-bounds the ideal one (reported as surrogate=MST).
double tree_length(const Lattice& l, std::span<const std::int64_t> pts);

// ||f||_m = max_i max_{u_i} int du_{others} |f| e^{m tau}; entries are
// absolute point tuples (arity fixed per kernel)
struct PointKernel {
    Lattice lat;
    int arity = 0;
    std::vector<std::pair<std::vector<std::int64_t>, double>> entries;
};
double kernel_norm(const PointKernel& f, double mass);

// same norm for a translation-invariant quartic kernel; all pins agree, the
// pinned sum runs over the stored offsets
double kernel_norm(const QuarticKernel& V, double mass);

// power series norm (Def of the weighted norms): F given per multi-degree
// (r_1..r_s) as a point kernel over the concatenated argument tuple;
// norm = sum_degrees ||f_deg||_m prod_i kappa_i^{r_i}
struct SeriesKernelSet {
    Lattice lat;
    int num_fields = 0;
    std::map<std::vector<int>, PointKernel> by_degree;
};
double series_norm(const SeriesKernelSet& F, double mass,
                   std::span<const double> weights);

// s-field map norm: per degree the max of the L quantity (pin the output
// point) and the R quantity (pin one input point, vol-sum over outputs),
// kappa-weighted, summed over degrees
struct FieldMapKernel {
    Lattice domX, codY;
    int num_fields = 0;
    struct Entry {
        std::int64_t y;
        std::vector<std::vector<std::int64_t>> args; // one vector per field slot
        double v;
    };
    std::map<std::vector<int>, std::vector<Entry>> by_degree;
};
double fieldmap_norm(const FieldMapKernel& A, double mass,
                     std::span<const double> weights);

// operator norm ||A||_m = max{ sup_y sum_x vol_X e^{m d} |A(y,x)|,
//                              sup_x sum_y vol_Y e^{m d} |A(y,x)| },
// columns extracted by applying to deltas. `dom_pins`/`cod_pins` restrict the
// sup to representative points (use all points when empty; a fundamental cell
// suffices for block-invariant operators).
double operator_norm(const LinOp& A, double mass,
                     std::span<const std::int64_t> dom_pins = {},
                     std::span<const std::int64_t> cod_pins = {});

} // namespace pflow

#endif
