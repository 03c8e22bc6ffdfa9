#ifndef PFLOW_FLOW_PARAMS_HPP
#define PFLOW_FLOW_PARAMS_HPP

#include <string>

#include "pflow/background.hpp"
#include "pflow/typed_poly.hpp"

namespace pflow {

// Scalar parameter system of the flow: the exponents eta, eta', eta_fl, the
// step count n_p, and the per-step weights
//   kappa(n)    = L^{eta n} / v0^{1/3-eps}
//   kappa'(n)   = L^{eta' n} / v0^{1/3-eps}
//   e_fl(n)     = L^{eta_fl n} v0^{1/3-2 eps}
//   kappa_fl(n) = (L^n / v0)^{eps/2},   r_n = (1/4) kappa_fl(n+1).
// All derived quantities are kept as natural logs; inputs must satisfy
//   mustar + v0^{4/3-16 eps} <= mu0 <= v0^{8/9+eps},  mustar >= 0.
struct FlowInputs {
    double v0 = 1e-8;
    double eps = 0.01;
    std::int64_t L = 3;
    double mu0 = 0.0;
    double mustar = 0.0;
};

struct FlowParams {
    FlowInputs in;
    double log_v0 = 0.0, log_gap = 0.0, log_L = 0.0;
    double ratio = 0.0; // log v0 / log(mu0 - mustar)
    double eta = 0.0, eta_p = 0.0, eta_fl = 0.0;
    int n_p = 0;

    double log_kappa(int n) const { return eta * n * log_L - (1.0 / 3 - in.eps) * log_v0; }
    double log_kappa_p(int n) const { return eta_p * n * log_L - (1.0 / 3 - in.eps) * log_v0; }
    double log_e_fl(int n) const { return eta_fl * n * log_L + (1.0 / 3 - 2 * in.eps) * log_v0; }
    double log_kappa_fl(int n) const { return (in.eps / 2) * (n * log_L - log_v0); }
    double log_r(int n) const { return log_kappa_fl(n + 1) - std::log(4.0); }

    double kappa(int n) const { return std::exp(log_kappa(n)); }
    double kappa_p(int n) const { return std::exp(log_kappa_p(n)); }
    double e_fl(int n) const { return std::exp(log_e_fl(n)); }
    double kappa_fl(int n) const { return std::exp(log_kappa_fl(n)); }
    double r(int n) const { return std::exp(log_r(n)); }
    double gap() const { return in.mu0 - in.mustar; }
};

FlowParams derive_params(const FlowInputs& in);

// monomial types of the low-degree correction family and their bookkeeping
enum class PKind { p110, p011, p002, p600 };
inline constexpr PKind all_pkinds[] = {PKind::p110, PKind::p011, PKind::p002,
                                       PKind::p600};
TypeVector type_of(PKind p);
std::string name_of(PKind p);

// initial sizes r_p(0): v0^{2-eps} for (6,0,0), v0^{1-4 eps} otherwise
double r_p0(const FlowParams& fp, PKind p);

// Pi_l^n(C) = prod_{j=l+1}^n (1 + C e_fl(j-1)/kappa(j)^2); n = -1 means the
// convergent infinite product
double pi_product(const FlowParams& fp, int ell, int n, double C);

// the four-case recursion display and its closed reformulation
double r_p_recursion(const FlowParams& fp, PKind p, int n, double C);
double r_p_closed(const FlowParams& fp, PKind p, int n, double C);

// tadpole-subtracted scaled chemical potential
//   mu_n^* = L^{2n} mu_0 - (2/|X_0^{(n)}|) int V_n(u1..u4) S_n(u4, u1),
// with the S_n diagonal taken from the exact momentum-class inverse
double mu_n_star(int n, const FlowParams& fp, const QuarticKernel& V0,
                 const LatticeSpec& base, double a, const AveragingProfile& prof,
                 const KineticSpec& kin);

// one inequality from the parameter appendix, evaluated at a given step
struct IneqRow {
    std::string name;
    int n = 0;
    double lhs = 0.0, rhs = 0.0;
    double margin = 0.0; // rhs/lhs multiplicative margin
    bool pass = false;
};

// every clean displayed inequality of the parameter appendix (the asymptotic
// O(eps^2 |log v0|) statements are excluded), plus the exponent windows
std::vector<IneqRow> verify_parameter_inequalities(const FlowParams& fp,
                                                   double C);

// checks that the two r_p formulations agree, returns the max relative gap
double r_p_formulation_gap(const FlowParams& fp, double C);

} // namespace pflow

#endif
