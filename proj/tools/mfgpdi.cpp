#include "mfgpdi/coupling.hpp"
#include "mfgpdi/errors.hpp"
#include "mfgpdi/experiments.hpp"
#include "mfgpdi/expression.hpp"
#include "mfgpdi/mfg_driver.hpp"
#include "mfgpdi/regularization.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace mfgpdi;

namespace {

constexpr int kExitConverged = 0;
constexpr int kExitError = 1;
constexpr int kExitNotConverged = 2;

struct SolveOptions {
    std::string ham = "abs";
    std::string reg = "my";
    double lambda = 0.1;
    std::string coupling = "zero";
    std::string source = "1";
    double nu = 1.0;
    std::size_t n = 256;
    double a = 0.0;
    double b = 1.0;
    int quad_nodes = 64;
    double theta = 0.5;
    double outer_tol = 1e-10;
    int max_outer = 500;
    bool stabilize = false;
    std::string config;
    std::string out = "out";
};

nlohmann::json read_json(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw InvalidArgument("cannot open config file '" + path + "'");
    return nlohmann::json::parse(in);
}

template <class T>
void take(const nlohmann::json& j, const char* key, T& dst, const CLI::App& app, const char* flag)
{
    if (j.contains(key) && app.count(flag) == 0) dst = j.at(key).get<T>();
}

void write_text(const fs::path& path, const std::string& text)
{
    std::ofstream f(path);
    if (!f) throw Error("cannot write '" + path.string() + "'");
    f << text;
}

int run_solve(SolveOptions o, const CLI::App& app)
{
    if (!o.config.empty()) {
        const nlohmann::json j = read_json(o.config);
        take(j, "ham", o.ham, app, "--ham");
        take(j, "reg", o.reg, app, "--reg");
        take(j, "lambda", o.lambda, app, "--lambda");
        take(j, "coupling", o.coupling, app, "--coupling");
        take(j, "source", o.source, app, "--source");
        take(j, "nu", o.nu, app, "--nu");
        take(j, "n", o.n, app, "--n");
        take(j, "a", o.a, app, "--a");
        take(j, "b", o.b, app, "--b");
        take(j, "quad_nodes", o.quad_nodes, app, "--quad-nodes");
        take(j, "theta", o.theta, app, "--theta");
        take(j, "outer_tol", o.outer_tol, app, "--outer-tol");
        take(j, "max_outer", o.max_outer, app, "--max-outer");
        take(j, "out", o.out, app, "--out");
    }
    if (o.n < 16) throw InvalidArgument("--n must be >= 16");
    if (!(o.nu > 0.0)) throw InvalidArgument("--nu must be positive");

    const MeshPtr mesh = Mesh1D::uniform(o.a, o.b, o.n);
    const Hamiltonian ham = Hamiltonian::from_id(o.ham, o.a, o.b);
    const CouplingSpec coupling = parse_coupling(o.coupling);
    const Expression g_expr(o.source);
    const ScalarField source = [g_expr](double x) { return g_expr(x, 0.0); };

    MfgConfig cfg;
    cfg.theta = o.theta;
    cfg.outer_tol = o.outer_tol;
    cfg.max_outer = o.max_outer;
    cfg.stabilize = o.stabilize;

    const MfgSolution sol =
        o.reg == "none"
            ? solve_mfg(mesh, o.nu, ham, coupling, source, cfg)
            : solve_mfg(mesh, o.nu, make_regularized(parse_family(o.reg), ham, o.lambda, o.quad_nodes),
                        coupling, source, cfg);

    fs::create_directories(o.out);
    {
        std::ofstream f(fs::path(o.out) / "u.csv");
        write_csv(f, sol.u);
    }
    {
        std::ofstream f(fs::path(o.out) / "m.csv");
        write_csv(f, sol.m);
    }
    nlohmann::json report = {{"ham", o.ham},           {"reg", o.reg},
                             {"coupling", coupling.name()}, {"nu", o.nu},
                             {"n", o.n},               {"diagnostics", to_json(sol.diagnostics)}};
    if (sol.lambda) report["lambda"] = *sol.lambda;
    write_text(fs::path(o.out) / "diagnostics.json", report.dump(2) + "\n");

    const auto& d = sol.diagnostics;
    std::cout << "converged=" << (d.converged ? "true" : "false") << " outer_iters=" << d.outer_iters
              << " hjb_residual=" << d.hjb_residual << " kfp_residual=" << d.kfp_residual
              << " inclusion_defect=" << d.inclusion_defect << '\n';
    if (d.peclet_warning) std::cerr << "warning: mesh Peclet number >= 1 without stabilization\n";
    return d.converged ? kExitConverged : kExitNotConverged;
}

ExperimentConfig merge_config(const std::string& config_path, ExperimentConfig cli,
                              const CLI::App& app)
{
    if (config_path.empty()) return cli;
    auto given = [&app](const char* flag) {
        const CLI::Option* opt = app.get_option_no_throw(flag);
        return opt != nullptr && opt->count() > 0;
    };
    ExperimentConfig c = ExperimentConfig::from_json(read_json(config_path));
    c.experiment = cli.experiment;
    if (given("--n")) c.n = cli.n;
    if (given("--nu")) c.nu = cli.nu;
    if (given("--j")) c.js = cli.js;
    if (given("--lambda")) c.lambdas = cli.lambdas;
    if (given("--out") || c.out.empty()) c.out = cli.out;
    return c;
}

template <class Report>
void emit(const ExperimentConfig& cfg, const Report& rep)
{
    fs::create_directories(cfg.out);
    const std::string hash = cfg.hash();
    {
        std::ofstream f(cfg.out / (cfg.experiment + ".csv"));
        rep.write_csv(f, hash);
    }
    nlohmann::json j = rep.to_json();
    j["config"] = cfg.to_json();
    j["config_hash"] = hash;
    write_text(cfg.out / (cfg.experiment + ".json"), j.dump(2) + "\n");
}

int run_reproduce(const ExperimentConfig& cfg)
{
    cfg.validate();
    bool ok = true;
    if (cfg.experiment == "ex33") {
        const Ex33Report rep = run_ex33(cfg);
        emit(cfg, rep);
        for (const auto& s : rep.solves) {
            ok = ok && s.converged;
            std::cout << "N=" << s.n << " start=m" << s.start
                      << (s.converged ? " converged" : " not converged") << " approached=m"
                      << s.approached << " err_h1=" << s.err_h1 << '\n';
        }
        std::cout << "separation_l2=" << rep.separation_l2 << '\n';
    } else if (cfg.experiment == "prop71") {
        const Prop71Report rep = run_prop71(cfg);
        emit(cfg, rep);
        for (const auto& r : rep.rows) {
            ok = ok && r.converged;
            std::cout << "j=" << r.j << " l2_error=" << r.l2_error
                      << " h1_semi_error_sq=" << r.h1_semi_error_sq << '\n';
        }
        std::cout << "limit_value=" << rep.limit_value << '\n';
    } else {
        const Prop72Report rep = run_prop72(cfg);
        emit(cfg, rep);
        for (const auto& r : rep.rows) {
            ok = ok && r.converged;
            std::cout << "j=" << r.j << " drift=" << r.expected_drift
                      << (r.drift_exact ? " exact" : " inexact") << " oracle_l2=" << r.oracle_l2 << '\n';
        }
        std::cout << "across_parity_l2=" << rep.across_parity_l2 << '\n';
    }
    return ok ? kExitConverged : kExitNotConverged;
}

int run_rate_cmd(const ExperimentConfig& cfg)
{
    cfg.validate();
    const RateReport rep = run_rate(cfg);
    emit(cfg, rep);
    bool ok = true;
    for (const auto& r : rep.rows) ok = ok && r.valid;
    std::cout << "family=" << rep.family << " slope=" << rep.slope << '\n';
    return ok ? kExitConverged : kExitNotConverged;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Stationary mean field games with nonsmooth Hamiltonians"};
    app.require_subcommand(1);

    SolveOptions so;
    auto* solve = app.add_subcommand("solve", "Solve one (regularized) MFG system");
    solve->add_option("--ham", so.ham, "abs | xabs | quad | control:<file.json>");
    solve->add_option("--reg", so.reg, "my | mollify | shift71 | shift72 | none");
    solve->add_option("--lambda", so.lambda, "Regularization parameter in (0, 1]");
    solve->add_option("--coupling", so.coupling, "zero | identity | scaled:<kappa>");
    solve->add_option("--source", so.source, "Source G as an expression in x");
    solve->add_option("--nu", so.nu, "Diffusion coefficient");
    solve->add_option("--n", so.n, "Number of mesh elements");
    solve->add_option("--a", so.a, "Left end of the domain");
    solve->add_option("--b", so.b, "Right end of the domain");
    solve->add_option("--quad-nodes", so.quad_nodes, "Mollifier quadrature nodes");
    solve->add_option("--theta", so.theta, "Picard damping");
    solve->add_option("--outer-tol", so.outer_tol, "Picard tolerance");
    solve->add_option("--max-outer", so.max_outer, "Picard iteration limit");
    solve->add_flag("--stabilize", so.stabilize, "Artificial diffusion in the KFP solve");
    solve->add_option("--config", so.config, "JSON file with the same keys");
    solve->add_option("--out", so.out, "Output directory");

    ExperimentConfig rc;
    std::string rc_config;
    rc.out = "out";
    auto* repro = app.add_subcommand("reproduce", "Run a canned example");
    repro->add_option("experiment", rc.experiment, "ex33 | prop71 | prop72")
        ->required()
        ->check(CLI::IsMember({"ex33", "prop71", "prop72"}));
    repro->add_option("--j", rc.js, "j values");
    repro->add_option("--n", rc.n, "Number of mesh elements");
    repro->add_option("--nu", rc.nu, "Diffusion coefficient");
    repro->add_option("--config", rc_config, "ExperimentConfig JSON");
    repro->add_option("--out", rc.out, "Output directory");

    ExperimentConfig tc;
    std::string tc_config, family;
    tc.out = "out";
    auto* rate = app.add_subcommand("rate", "Convergence rate in lambda");
    rate->add_option("family", family, "my | mollify")->required()->check(CLI::IsMember({"my", "mollify"}));
    rate->add_option("--lambda", tc.lambdas, "Decreasing lambda values");
    rate->add_option("--n", tc.n, "Number of mesh elements");
    rate->add_option("--nu", tc.nu, "Diffusion coefficient");
    rate->add_option("--config", tc_config, "ExperimentConfig JSON");
    rate->add_option("--out", tc.out, "Output directory");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*solve) return run_solve(so, *solve);
        if (*repro) return run_reproduce(merge_config(rc_config, rc, *repro));
        tc.experiment = "rate-" + family;
        return run_rate_cmd(merge_config(tc_config, tc, *rate));
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitError;
    }
}
