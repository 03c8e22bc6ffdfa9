#ifndef PFLOW_LINOP_HPP
#define PFLOW_LINOP_HPP

#include <functional>
#include <memory>

#include "pflow/fft.hpp"
#include "pflow/field.hpp"

namespace pflow {

// Linear map between field spaces with the uniform apply / transpose /
// kernel-column interface. The transpose is with respect to the bilinear
// forms <.,.> of the two lattices (no conjugation):
//   <A^T g, f>_dom = <g, A f>_cod.
struct LinOp {
    Lattice dom, cod;
    std::function<Field(const Field&)> fwd;
    std::function<Field(const Field&)> trn;

    Field apply(const Field& f) const;
    Field apply_transpose(const Field& g) const;
    // kernel column A(., x): apply to a delta at x
    Field kernel_column(std::int64_t x) const;
    // kernel row A(y, .): transpose column
    Field kernel_row(std::int64_t y) const;
};

LinOp identity_op(const Lattice& l);
LinOp transpose_op(const LinOp& a);
LinOp compose(const LinOp& a, const LinOp& b); // a after b
LinOp scale_op(cplx c, const LinOp& a);
LinOp add_op(const LinOp& a, const LinOp& b);

// translation-invariant operator given by a multiplier table over the index
// momentum grid (same layout as fields)
LinOp multiplier_op(const Lattice& l, std::vector<cplx> mhat);

// multiplier table of a translation-invariant operator, via delta column + FFT
std::vector<cplx> multiplier_of(const LinOp& a);

// helpers
Field apply_multiplier(const Lattice& l, const std::vector<cplx>& mhat,
                       const Field& f);
Field fft_of(const Field& f);
Field ifft_of(const Field& f);

// index reversal x -> -x; for the real-kernel translation-covariant operators
// used here, A^T = flip . A . flip
Field flip_field(const Field& f);

} // namespace pflow

#endif
