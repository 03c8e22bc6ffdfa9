#ifndef PFLOW_FIELD_HPP
#define PFLOW_FIELD_HPP

#include <complex>
#include <vector>

#include "pflow/lattice.hpp"
#include "pflow/rng.hpp"
#include "pflow/simd.hpp"

namespace pflow {

using cplx = std::complex<double>;

struct Field {
    Lattice lat;
    std::vector<cplx> v;

    Field() = default;
    explicit Field(const Lattice& l) : lat(l), v(l.num_points(), cplx{}) {}
    Field(const Lattice& l, std::vector<cplx> data) : lat(l), v(std::move(data)) {}

    std::int64_t size() const { return static_cast<std::int64_t>(v.size()); }
    cplx& operator[](std::int64_t i) { return v[i]; }
    const cplx& operator[](std::int64_t i) const { return v[i]; }

    Field& operator+=(const Field& o);
    Field& operator-=(const Field& o);
    Field& operator*=(cplx a);
    double sup() const { return simd::active().sup_abs(v.data(), v.size()); }
};

Field operator+(Field a, const Field& b);
Field operator-(Field a, const Field& b);
Field operator*(cplx a, Field f);
Field conj(const Field& f);

// vol * sum f(u) g(u); bilinear, no conjugation
cplx inner(const Field& f, const Field& g);

Field random_field(const Lattice& l, Rng& rng, double amplitude = 1.0);
Field constant_field(const Lattice& l, cplx c);
// delta normalized so that <delta_x, f> = f(x): value 1/vol at x
Field delta_field(const Lattice& l, std::int64_t idx);

// forward difference (1/eps_nu)[f(x + eps_nu e_nu) - f(x)], periodic
Field forward_derivative(const Field& f, int nu);

struct ExtendedField {
    Field base;
    std::array<Field, 4> deriv;
};
ExtendedField extend(const Field& f); // base plus its four forward derivatives

// Parabolic scaling. scale_up maps a field on X_{j-1}^{(k)} to X_j^{(k)} with
// multiplier L^{3/2} (plain), L^{7/2} (nu = 0) or L^{5/2} (nu = 1..3); the
// point map is the identity on enumeration indices. scale_down is the inverse.
enum class ScaleMode { plain, time_deriv, space_deriv };
Field scale_up(const Field& f, ScaleMode mode = ScaleMode::plain);
Field scale_down(const Field& f, ScaleMode mode = ScaleMode::plain);
Field scale_up_n(Field f, int steps);
Field scale_down_n(Field f, int steps);

// relabel j -> j-1 keeping values (the map called L_* in the hierarchy)
Field relabel_coarser(const Field& f);
Field relabel_finer(const Field& f);

// Small-field cutoff at scale zero: true iff
//   |psi(x)|       <= e^{theta mu/2} (1/(theta v))^{eR+er},
//   |d_nu psi(x)|  <= e^{theta mu/2} (1/theta)^{eRP} (1/(theta v))^{er}, nu>=1,
//   |d_0 psi(x)|   <= e^{theta mu/2} (1/(theta v))^{er}
// at every point (closed inequalities).
struct CutoffParams {
    double e_R, e_r, e_RP;
    double theta, v, mu;
};
CutoffParams default_cutoff(double eps, double theta, double v, double mu);
bool chi0_cutoff(const Field& psi, const CutoffParams& p);

} // namespace pflow

#endif
