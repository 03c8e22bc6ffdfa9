// Command-line driver: parameter tables, identity verification suites,
// background solves, the critical chemical potential, and kernel norms.
//
// Exit codes: 0 pass, 1 identity failure, 2 configuration error,
// 3 solver failure.

#include <filesystem>
#include <iostream>
#include <map>
#include <sstream>

#include "CLI11.hpp"

#include "pflow/io.hpp"
#include "pflow/norms.hpp"
#include "pflow/verify.hpp"

using namespace pflow;

namespace {

struct RunConfig {
    std::map<std::string, std::string> kv;

    std::string get(const std::string& key, const std::string& dflt) const
    {
        const auto it = kv.find(key);
        return it == kv.end() ? dflt : it->second;
    }
    double num(const std::string& key, double dflt) const
    {
        const auto it = kv.find(key);
        return it == kv.end() ? dflt : std::stod(it->second);
    }
    std::int64_t integer(const std::string& key, std::int64_t dflt) const
    {
        const auto it = kv.find(key);
        return it == kv.end() ? dflt : std::stoll(it->second);
    }
};

RunConfig load_config(const std::string& path)
{
    RunConfig cfg;
    if (!path.empty())
        cfg.kv = parse_flat_config(read_file(path));
    return cfg;
}

FlowInputs flow_inputs(const RunConfig& cfg)
{
    FlowInputs in;
    in.v0 = cfg.num("v0", 1e-10);
    in.eps = cfg.num("eps", 0.01);
    in.L = cfg.integer("L", 3);
    in.mustar = cfg.num("flow_mustar", 0.1 * std::pow(in.v0, 8.0 / 9 + in.eps));
    in.mu0 = cfg.num("flow_mu0", in.mustar + std::pow(in.v0, 1.0 / 1.04));
    return in;
}

VerifyConfig verify_config(const RunConfig& cfg, std::uint64_t seed,
                           double tol_scale)
{
    VerifyConfig v;
    v.seed = seed;
    v.tol_scale = tol_scale;
    v.q_exp = static_cast<int>(cfg.integer("q", 4));
    v.a = cfg.num("a", 1.0);
    v.theta = cfg.num("theta", 1.0);
    v.mass = cfg.num("mass", 1.0);
    v.lambda = cfg.num("lambda", 2e-4);
    v.mu_re = cfg.num("mu_re", 4e-4);
    v.mu_im = cfg.num("mu_im", 0.0);
    v.gl_order = static_cast<int>(cfg.integer("gl_order", 8));
    v.C_R = cfg.num("CR", 0.01);
    v.mustar.Ltp = cfg.integer("mustar_Ltp", 8);
    v.mustar.Ns0 = cfg.integer("mustar_Ns0", 64);
    v.mustar.ladder = static_cast<int>(cfg.integer("mustar_ladder", 3));
    v.mustar.v = SpatialKernel::nearest_neighbor(cfg.num("mustar_v0", 0.004),
                                                 cfg.num("mustar_v1", 0.0004));
    return v;
}

MuStarConfig mustar_config(const RunConfig& cfg)
{
    MuStarConfig m;
    m.kin = KineticSpec{cfg.num("theta", 1.0), cfg.num("mass", 1.0), nullptr};
    m.Ltp = cfg.integer("mustar_Ltp", 8);
    m.Ns0 = cfg.integer("mustar_Ns0", 64);
    m.ladder = static_cast<int>(cfg.integer("mustar_ladder", 3));
    m.v = SpatialKernel::nearest_neighbor(cfg.num("mustar_v0", 0.004),
                                          cfg.num("mustar_v1", 0.0004));
    return m;
}

QuarticKernel interaction_kernel(const RunConfig& cfg, const Lattice& l)
{
    const std::string kind = cfg.get("interaction", "onsite");
    if (kind == "onsite")
        return onsite_quartic(l, cfg.num("lambda", 2e-4), cfg.num("nn_tail", 0.0));
    if (kind == "vtheta") {
        const KineticSpec kin{cfg.num("theta", 1.0), cfg.num("mass", 1.0),
                              nullptr};
        const SpatialKernel v = SpatialKernel::nearest_neighbor(
            cfg.num("mustar_v0", 0.004), cfg.num("mustar_v1", 0.0004));
        return build_vtheta(l, v, kin,
                            static_cast<int>(cfg.integer("vtheta_steps", 64)));
    }
    if (kind.rfind("file:", 0) == 0)
        return kernel_from_json(read_file(kind.substr(5)));
    throw ConfigError("unknown interaction kind: " + kind);
}

std::string out_path(const std::string& dir, const std::string& name)
{
    std::filesystem::create_directories(dir);
    return (std::filesystem::path(dir) / name).string();
}

int cmd_params(const RunConfig& cfg, const std::string& out)
{
    const FlowParams fp = derive_params(flow_inputs(cfg));
    const double C = cfg.num("CR", 0.01);

    std::ostringstream js;
    js << "{\n  \"v0\": " << fmt_double(fp.in.v0)
       << ",\n  \"eps\": " << fmt_double(fp.in.eps) << ",\n  \"L\": " << fp.in.L
       << ",\n  \"mu0\": " << fmt_double(fp.in.mu0)
       << ",\n  \"mustar\": " << fmt_double(fp.in.mustar)
       << ",\n  \"ratio\": " << fmt_double(fp.ratio)
       << ",\n  \"eta\": " << fmt_double(fp.eta)
       << ",\n  \"eta_prime\": " << fmt_double(fp.eta_p)
       << ",\n  \"eta_fl\": " << fmt_double(fp.eta_fl)
       << ",\n  \"n_p\": " << fp.n_p << "\n}\n";
    write_file(out_path(out, "params.json"), js.str());

    std::ostringstream csv;
    csv << "n,kappa,kappa_prime,kappa_fl,e_fl,r_n,rp_110,rp_011,rp_002,rp_600\n";
    for (int n = 0; n <= fp.n_p; ++n) {
        csv << n << ',' << fmt_double(fp.kappa(n)) << ','
            << fmt_double(fp.kappa_p(n)) << ',' << fmt_double(fp.kappa_fl(n))
            << ',' << fmt_double(fp.e_fl(n)) << ',' << fmt_double(fp.r(n));
        for (const PKind p : all_pkinds)
            csv << ',' << fmt_double(r_p_recursion(fp, p, n, C));
        csv << '\n';
    }
    write_file(out_path(out, "flow_table.csv"), csv.str());
    std::cout << "wrote params.json and flow_table.csv (" << fp.n_p + 1
              << " rows)\n";
    return 0;
}

int cmd_flow(const RunConfig& cfg, const std::string& out)
{
    const FlowParams fp = derive_params(flow_inputs(cfg));
    const double C = cfg.num("CR", 0.01);
    const LatticeSpec base{cfg.integer("L", 3), cfg.integer("Ltp", 9),
                           cfg.integer("Lsp", 3), 0, 0};
    const Lattice X0(base);
    const AveragingProfile prof =
        build_profile(static_cast<int>(cfg.integer("q", 4)), base.L);
    const KineticSpec kin{cfg.num("theta", 1.0), cfg.num("mass", 1.0), nullptr};
    const QuarticKernel V0 = interaction_kernel(cfg, X0);

    // largest n with a nondegenerate fine lattice
    int max_lattice_n = 0;
    for (int n = 1; n <= fp.n_p; ++n) {
        LatticeSpec s = base;
        s.j = n;
        try {
            (void)Lattice(s);
            max_lattice_n = n;
        } catch (const ConfigError&) {
            break;
        }
    }

    std::ostringstream csv;
    csv << "n,kappa,kappa_prime,kappa_fl,e_fl,r_n,mu_n_star,mu_n_star_over_L2n,"
           "rp_110,rp_011,rp_002,rp_600\n";
    for (int n = 0; n <= fp.n_p; ++n) {
        csv << n << ',' << fmt_double(fp.kappa(n)) << ','
            << fmt_double(fp.kappa_p(n)) << ',' << fmt_double(fp.kappa_fl(n))
            << ',' << fmt_double(fp.e_fl(n)) << ',' << fmt_double(fp.r(n));
        if (n <= max_lattice_n) {
            const double mns =
                mu_n_star(n, fp, V0, base, cfg.num("a", 1.0), prof, kin);
            csv << ',' << fmt_double(mns) << ','
                << fmt_double(mns / std::pow(static_cast<double>(base.L), 2.0 * n));
        } else {
            csv << ",,";
        }
        for (const PKind p : all_pkinds)
            csv << ',' << fmt_double(r_p_recursion(fp, p, n, C));
        csv << '\n';
    }
    write_file(out_path(out, "flow_table.csv"), csv.str());

    // coupling-form multiplier tables and a spectral summary, for regression
    // pinning
    std::ostringstream tables;
    tables << "{\n  \"coupling_tables\": {";
    for (int n = 1; n <= max_lattice_n; ++n) {
        LatticeSpec us = base;
        us.n = n;
        const Lattice X0n(us);
        const auto table = quad_coupling_table(prof, X0n, n, cfg.num("a", 1.0));
        tables << (n > 1 ? "," : "") << "\n    \"n=" << n << "\": [";
        for (std::size_t i = 0; i < table.size(); ++i)
            tables << (i ? ", " : "") << fmt_double(table[i]);
        tables << "]";
    }
    tables << "\n  },\n  \"spectral\": {";
    for (int n = 1; n <= max_lattice_n; ++n) {
        LatticeSpec fs2 = base;
        fs2.j = n;
        const Lattice Xn(fs2);
        const auto mult = kinetic_multiplier(Xn, kin, n);
        double lo = 1e300, hi = 0.0;
        for (const auto& m : mult) {
            lo = std::min(lo, std::abs(m));
            hi = std::max(hi, std::abs(m));
        }
        LatticeSpec us = base;
        us.n = n;
        const GreensOp S(Xn, Lattice(us), prof, kin, n, cfg.num("a", 1.0),
                         cplx{});
        tables << (n > 1 ? "," : "") << "\n    \"n=" << n
               << "\": {\"kinetic_min\": " << fmt_double(lo)
               << ", \"kinetic_max\": " << fmt_double(hi)
               << ", \"sigma_min\": " << fmt_double(S.smallest_singular_value())
               << "}";
    }
    tables << "\n  }\n}\n";
    write_file(out_path(out, "operator_tables.json"), tables.str());

    std::cout << "wrote flow_table.csv (" << fp.n_p + 1 << " rows, mu_n^* up to n="
              << max_lattice_n << ") and operator_tables.json\n";
    return 0;
}

int cmd_verify(const RunConfig& cfg, const std::string& suite,
               const std::string& out, std::uint64_t seed, double tol_scale)
{
    const VerifyConfig vc = verify_config(cfg, seed, tol_scale);
    std::vector<std::string> names;
    if (suite == "all")
        names.assign(std::begin(kSuiteNames), std::end(kSuiteNames));
    else
        names.push_back(suite);
    const auto reports = run_suites(names, vc);
    const std::string json = reports_to_json(reports, vc);
    write_file(out_path(out, "verify_" + suite + ".json"), json);

    bool pass = true;
    for (const auto& rep : reports) {
        int fails = 0;
        for (const auto& r : rep.rows)
            if (!r.pass)
                ++fails;
        std::cout << rep.suite << ": " << rep.rows.size() << " rows, " << fails
                  << " failures\n";
        pass = pass && rep.pass;
    }
    return pass ? 0 : 1;
}

int cmd_background(const RunConfig& cfg, const std::string& out,
                   std::uint64_t seed)
{
    const LatticeSpec base{cfg.integer("L", 3), cfg.integer("Ltp", 81),
                           cfg.integer("Lsp", 9), 0, 0};
    const int n = static_cast<int>(cfg.integer("n", 1));
    LatticeSpec fs = base;
    fs.j = n;
    const Lattice Xf(fs);
    const AveragingProfile prof =
        build_profile(static_cast<int>(cfg.integer("q", 4)), base.L);
    const KineticSpec kin{cfg.num("theta", 1.0), cfg.num("mass", 1.0), nullptr};
    const BgCtx c = make_bg_ctx(base, n, cfg.num("a", 1.0),
                                cplx{cfg.num("mu_re", 4e-4), cfg.num("mu_im", 0.0)},
                                interaction_kernel(cfg, Xf), prof, kin);

    Field psis(c.X0), psi(c.X0);
    const std::string ps_file = cfg.get("psi_star_file", "");
    const std::string p_file = cfg.get("psi_file", "");
    if (!ps_file.empty() && !p_file.empty()) {
        psis = field_from_json(read_file(ps_file));
        psi = field_from_json(read_file(p_file));
    } else {
        Rng rng(seed);
        psis = random_field(c.X0, rng, cfg.num("amplitude", 0.4));
        psi = random_field(c.X0, rng, cfg.num("amplitude", 0.4));
    }

    const BackgroundSolution sol = solve_background(c, psis, psi);
    write_file(out_path(out, "phi_star.json"), field_to_json(sol.phis));
    write_file(out_path(out, "phi.json"), field_to_json(sol.phi));
    std::ostringstream js;
    js << "{\n  \"residual_star\": " << fmt_double(sol.residual_star)
       << ",\n  \"residual\": " << fmt_double(sol.residual)
       << ",\n  \"iterations\": " << sol.iterations
       << ",\n  \"contraction\": " << fmt_double(sol.contraction)
       << ",\n  \"seed\": " << seed << "\n}\n";
    write_file(out_path(out, "background.json"), js.str());
    std::cout << "background solve: residuals " << fmt_double(sol.residual_star)
              << " / " << fmt_double(sol.residual) << " in " << sol.iterations
              << " iterations\n";
    return 0;
}

int cmd_mustar(const RunConfig& cfg, const std::string& out)
{
    const MuStarConfig mc = mustar_config(cfg);
    const double fourier = mustar_fourier(mc);
    const MuStarLattice lat = mustar_lattice(mc);
    const double agreement = std::abs(lat.value - fourier);

    std::ostringstream js;
    js << "{\n  \"fourier\": " << fmt_double(fourier)
       << ",\n  \"lattice\": " << fmt_double(lat.value)
       << ",\n  \"agreement\": " << fmt_double(agreement)
       << ",\n  \"error_estimate\": " << fmt_double(lat.error_est)
       << ",\n  \"converged\": " << (lat.converged ? "true" : "false")
       << ",\n  \"ladder\": [";
    for (std::size_t i = 0; i < lat.ladder_values.size(); ++i)
        js << (i ? ", " : "") << fmt_double(lat.ladder_values[i]);
    js << "],\n  \"beta_sweep\": [";
    MuStarConfig sweep = mc;
    for (int i = 0; i < 4; ++i) {
        js << (i ? ", " : "") << "[" << sweep.Ltp << ", "
           << fmt_double(mustar_fourier(sweep)) << "]";
        sweep.Ltp *= 10;
    }
    js << "]\n}\n";
    write_file(out_path(out, "mustar.json"), js.str());
    std::cout << "mustar: fourier " << fmt_double(fourier) << ", lattice "
              << fmt_double(lat.value) << " +- " << fmt_double(lat.error_est)
              << "\n";
    return lat.converged && agreement <= lat.error_est + 1e-9 * fourier ? 0 : 1;
}

int cmd_norms(const RunConfig& cfg, const std::string& out)
{
    const LatticeSpec base{cfg.integer("L", 3), cfg.integer("Ltp", 9),
                           cfg.integer("Lsp", 3), 0, 0};
    const Lattice X0(base);
    const QuarticKernel V = interaction_kernel(cfg, X0);
    const double m = cfg.num("mass_norm", 0.1);

    std::ostringstream js;
    js << "{\n  \"surrogate\": \"MST\",\n  \"entries\": " << V.num_entries()
       << ",\n  \"rv_bar\": " << fmt_double(V.average_rv())
       << ",\n  \"norm_m0\": " << fmt_double(kernel_norm(V, 0.0))
       << ",\n  \"norm_m\": " << fmt_double(kernel_norm(V, m))
       << ",\n  \"norm_2m\": " << fmt_double(kernel_norm(V, 2 * m))
       << ",\n  \"v0_frak\": " << fmt_double(2.0 * kernel_norm(V, 2 * m))
       << "\n}\n";
    write_file(out_path(out, "norms.json"), js.str());
    std::cout << "norms: |V|_0 " << fmt_double(kernel_norm(V, 0.0)) << ", 2|V|_2m "
              << fmt_double(2.0 * kernel_norm(V, 2 * m)) << " (surrogate=MST)\n";
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"block-spin renormalization toolkit"};
    app.require_subcommand(1);
    app.fallthrough(); // global flags may follow the subcommand

    std::string config_path, out_dir = ".", suite = "all";
    std::uint64_t seed = 1;
    double tol_scale = 1.0;
    app.add_option("--config", config_path, "key=value configuration file");
    app.add_option("--seed", seed, "seed for all random instances");
    app.add_option("--out", out_dir, "output directory");
    app.add_option("--tol-scale", tol_scale, "multiplies every tolerance");

    auto* sub_params = app.add_subcommand("params", "derived flow parameters");
    auto* sub_verify = app.add_subcommand("verify", "identity verification");
    sub_verify->add_option("--suite", suite,
                           "all|scaling|background|action|symmetry|appendixC|mustar");
    auto* sub_background =
        app.add_subcommand("background", "background-field solve");
    auto* sub_mustar =
        app.add_subcommand("mustar", "critical chemical potential");
    auto* sub_norms = app.add_subcommand("norms", "kernel norms");
    auto* sub_flow = app.add_subcommand("flow", "flow table with mu_n^*");

    CLI11_PARSE(app, argc, argv);

    try {
        const RunConfig cfg = load_config(config_path);
        if (sub_params->parsed())
            return cmd_params(cfg, out_dir);
        if (sub_verify->parsed())
            return cmd_verify(cfg, suite, out_dir, seed, tol_scale);
        if (sub_background->parsed())
            return cmd_background(cfg, out_dir, seed);
        if (sub_mustar->parsed())
            return cmd_mustar(cfg, out_dir);
        if (sub_norms->parsed())
            return cmd_norms(cfg, out_dir);
        if (sub_flow->parsed())
            return cmd_flow(cfg, out_dir);
    } catch (const ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return 2;
    } catch (const IdentityError& e) {
        std::cerr << "identity violation: " << e.what() << "\n";
        return 1;
    } catch (const SolverError& e) {
        std::cerr << "solver failure: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
