#ifndef PFLOW_VERIFY_HPP
#define PFLOW_VERIFY_HPP

#include "pflow/action.hpp"
#include "pflow/flow_params.hpp"
#include "pflow/mustar.hpp"

namespace pflow {

// One verification row: an identity evaluated at a seeded instance, its
// measured residual and the tolerance it is held to. Report-only rows carry
// tolerance 0 and always pass.
struct ReportRow {
    std::string name;
    std::string lattice;
    int n = 0;
    std::uint64_t seed = 0;
    double residual = 0.0;
    double tolerance = 0.0;
    bool pass = true;
};

struct SuiteReport {
    std::string suite;
    std::vector<ReportRow> rows;
    bool pass = true;
};

struct VerifyConfig {
    std::uint64_t seed = 1;
    double tol_scale = 1.0; // multiplies every tolerance
    int q_exp = 4;
    double a = 1.0;
    double theta = 1.0, mass = 1.0;
    double lambda = 2e-4;      // on-site coupling for seeded instances
    double mu_re = 4e-4, mu_im = 0.0;
    int gl_order = 8;
    double C_R = 0.01; // recursion constant for the parameter battery
    std::vector<double> eps_grid{0.005, 0.01, 0.02};
    std::vector<double> v0_grid{1e-8, 1e-10, 1e-12};
    std::vector<std::int64_t> L_grid{3, 5};
    MuStarConfig mustar = [] {
        MuStarConfig m;
        m.v = SpatialKernel::nearest_neighbor(0.004, 0.0004);
        return m;
    }();
};

inline const char* const kSuiteNames[] = {"scaling",  "background", "action",
                                          "symmetry", "appendixC",  "mustar"};

SuiteReport run_suite(const std::string& name, const VerifyConfig& cfg);
std::vector<SuiteReport> run_suites(const std::vector<std::string>& names,
                                    const VerifyConfig& cfg);

// deterministic JSON: schema version, seed, rows in evaluation order
std::string reports_to_json(const std::vector<SuiteReport>& reports,
                            const VerifyConfig& cfg);

} // namespace pflow

#endif
