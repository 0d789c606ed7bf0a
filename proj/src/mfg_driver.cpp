#include "mfgpdi/mfg_driver.hpp"

#include "mfgpdi/errors.hpp"
#include "mfgpdi/kfp.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <ostream>

namespace mfgpdi {

namespace {

using InclusionSet = std::function<Interval(double, double)>;

double inclusion_defect(const FeFunction& u, const ScalarField& drift, const InclusionSet& set)
{
    const Mesh1D& mesh = *u.mesh();
    double defect = 0.0;
    for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
        const double p = u.slope(e);
        for (double xq : mesh.gauss_points(e)) defect = std::max(defect, set(xq, p).distance(drift(xq)));
    }
    return defect;
}

FeFunction initial_density(const MeshPtr& mesh, double nu, std::span<const double> g_load,
                           const MfgConfig& cfg)
{
    if (const auto* given = std::get_if<FeFunction>(&cfg.initial_m)) {
        if (!given->mesh()->same_nodes(*mesh))
            throw MeshMismatch("solve_mfg: initial density is on another mesh");
        return FeFunction(mesh, std::vector<double>(given->values().begin(), given->values().end()));
    }
    if (std::get<InitialDensity>(cfg.initial_m) == InitialDensity::Zero) return FeFunction::zero(mesh);
    return solve_kfp(mesh, nu, [](double) { return 0.0; }, g_load, cfg.stabilize).m;
}

MfgSolution picard(const MeshPtr& mesh, double nu, const GradientNonlinearity& g,
                   const InclusionSet& set, const CouplingSpec& coupling,
                   const ScalarField& source, const MfgConfig& cfg)
{
    if (!(cfg.theta > 0.0 && cfg.theta <= 1.0)) throw InvalidArgument("MfgConfig: theta must lie in (0, 1]");
    if (!(cfg.outer_tol > 0.0)) throw InvalidArgument("MfgConfig: outer_tol must be positive");
    if (cfg.max_outer < 1) throw InvalidArgument("MfgConfig: max_outer must be >= 1");

    const std::vector<double> g_load = load_vector(*mesh, source);
    FeFunction m = initial_density(mesh, nu, g_load, cfg);
    std::optional<FeFunction> u_warm;
    MfgDiagnostics diag;
    bool outer_converged = false;

    for (int k = 1; k <= cfg.max_outer; ++k) {
        const HjbResult hjb = solve_hjb(mesh, nu, g, coupling.apply(m), cfg.hjb, u_warm);
        u_warm = hjb.u;
        const KfpResult kfp = solve_kfp(mesh, nu, realized_drift(hjb.u, g), g_load, cfg.stabilize);
        FeFunction next = m;
        next.blend(kfp.m, cfg.theta);
        const double inc = l2_distance(next, m);
        m = std::move(next);
        diag.increments.push_back(inc);
        diag.outer_iters = k;
        if (inc <= cfg.outer_tol) {
            outer_converged = true;
            break;
        }
        if (picard_increments_diverging(diag.increments))
            throw Diverged("Picard increment grew tenfold over 5 consecutive iterations");
    }

    // Close the loop once more so the returned pair is consistent.
    const HjbResult hjb = solve_hjb(mesh, nu, g, coupling.apply(m), cfg.hjb, u_warm);
    ScalarField drift = realized_drift(hjb.u, g);
    KfpResult kfp = solve_kfp(mesh, nu, drift, g_load, cfg.stabilize);

    MfgSolution sol{hjb.u, std::move(kfp.m), drift, std::nullopt, std::move(diag)};
    MfgDiagnostics& d = sol.diagnostics;
    d.hjb_converged = hjb.converged;
    d.last_increment = d.increments.empty() ? 0.0 : d.increments.back();
    d.converged = outer_converged && hjb.converged;
    d.hjb_residual = norm2(hjb_residual(*mesh, nu, g, sol.u, coupling.apply(sol.m)));
    d.kfp_residual = norm2(kfp_residual(*mesh, nu, sol.drift, sol.m, g_load, cfg.stabilize));
    d.inclusion_defect = inclusion_defect(sol.u, sol.drift, set);
    const auto values = sol.m.values();
    d.min_density = *std::min_element(values.begin(), values.end());
    d.peclet_warning = kfp.peclet_warning;
    return sol;
}

} // namespace

ScalarField realized_drift(const FeFunction& u, const GradientNonlinearity& g)
{
    return [u, slope = g.slope](double x) { return slope(x, u.derivative(x)); };
}

MfgSolution solve_mfg(const MeshPtr& mesh, double nu, const RegularizedHamiltonian& reg,
                      const CouplingSpec& coupling, const ScalarField& source, const MfgConfig& cfg)
{
    const InclusionSet singleton = [reg](double x, double p) {
        const double b = reg.dp(x, p);
        return Interval{b, b};
    };
    MfgSolution sol = picard(mesh, nu, nonlinearity(reg), singleton, coupling, source, cfg);
    sol.lambda = reg.lambda();
    return sol;
}

MfgSolution solve_mfg(const MeshPtr& mesh, double nu, const Hamiltonian& ham,
                      const CouplingSpec& coupling, const ScalarField& source, const MfgConfig& cfg)
{
    const InclusionSet set = [ham](double x, double p) { return ham.subdiff(x, p); };
    return picard(mesh, nu, nonlinearity(ham), set, coupling, source, cfg);
}

double pdi_inclusion_defect(const FeFunction& u, const ScalarField& drift, const Hamiltonian& ham)
{
    return inclusion_defect(u, drift, [&ham](double x, double p) { return ham.subdiff(x, p); });
}

double fit_loglog_slope(std::span<const double> x, std::span<const double> y)
{
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    int n = 0;
    for (std::size_t i = 0; i < std::min(x.size(), y.size()); ++i) {
        if (!(x[i] > 0.0 && y[i] > 0.0)) continue;
        const double lx = std::log(x[i]);
        const double ly = std::log(y[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
        ++n;
    }
    if (n < 2) return std::numeric_limits<double>::quiet_NaN();
    const double denom = n * sxx - sx * sx;
    return denom == 0.0 ? std::numeric_limits<double>::quiet_NaN() : (n * sxy - sx * sy) / denom;
}

RateReport rate_study(const MeshPtr& mesh, double nu, const Hamiltonian& base,
                      RegularizationFamily family, const CouplingSpec& coupling,
                      const ScalarField& source, std::span<const double> lambdas,
                      const MfgSolution& reference, const MfgConfig& cfg, int quad_nodes,
                      bool parallel)
{
    for (std::size_t i = 1; i < lambdas.size(); ++i)
        if (!(lambdas[i] < lambdas[i - 1]))
            throw InvalidArgument("rate_study: lambdas must be strictly decreasing");
    if (!reference.m.mesh()->same_nodes(*mesh))
        throw MeshMismatch("rate_study: reference solution is on another mesh");

    auto run = [&, family](double lambda) {
        const RegularizedHamiltonian reg = make_regularized(family, base, lambda, quad_nodes);
        RateRow row;
        row.lambda = lambda;
        row.omega = reg.omega();
        try {
            const MfgSolution sol = solve_mfg(mesh, nu, reg, coupling, source, cfg);
            row.err_u_h1 = h1_distance(sol.u, reference.u);
            row.err_m_l2 = l2_distance(sol.m, reference.m);
            row.outer_iters = sol.diagnostics.outer_iters;
            row.valid = sol.diagnostics.converged;
        } catch (const Error&) {
            row.valid = false;
        }
        return row;
    };

    RateReport report;
    report.family = to_string(family);
    if (parallel) {
        std::vector<std::future<RateRow>> jobs;
        for (double lambda : lambdas) jobs.push_back(std::async(std::launch::async, run, lambda));
        for (auto& job : jobs) report.rows.push_back(job.get());
    } else {
        for (double lambda : lambdas) report.rows.push_back(run(lambda));
    }

    std::vector<double> omegas;
    std::vector<double> errors;
    for (const RateRow& row : report.rows) {
        if (!row.valid) continue;
        omegas.push_back(row.omega);
        errors.push_back(row.total());
    }
    const std::size_t calibration = (omegas.size() + 2) / 3;
    for (std::size_t k = 0; k < calibration; ++k)
        report.sqrt_constant = std::max(report.sqrt_constant, errors[k] / std::sqrt(omegas[k]));
    report.slope = fit_loglog_slope(omegas, errors);
    return report;
}

void RateReport::write_csv(std::ostream& out, const std::string& config_hash) const
{
    const auto old_precision = out.precision(std::numeric_limits<double>::max_digits10);
    out << "lambda,omega,err_u_h1,err_m_l2,slope";
    if (!config_hash.empty()) out << ",config_hash";
    out << '\n';
    for (const RateRow& row : rows) {
        out << row.lambda << ',' << row.omega << ',';
        if (row.valid) out << row.err_u_h1 << ',' << row.err_m_l2;
        else out << "nan,nan";
        out << ',' << slope;
        if (!config_hash.empty()) out << ',' << config_hash;
        out << '\n';
    }
    out.precision(old_precision);
}

nlohmann::json RateReport::to_json() const
{
    nlohmann::json rows_json = nlohmann::json::array();
    for (const RateRow& row : rows) {
        rows_json.push_back({{"lambda", row.lambda},
                             {"omega", row.omega},
                             {"err_u_h1", row.err_u_h1},
                             {"err_m_l2", row.err_m_l2},
                             {"outer_iters", row.outer_iters},
                             {"valid", row.valid}});
    }
    return {{"family", family}, {"slope", slope}, {"sqrt_constant", sqrt_constant}, {"rows", rows_json}};
}

nlohmann::json to_json(const MfgDiagnostics& d)
{
    return {{"hjb_residual", d.hjb_residual},
            {"kfp_residual", d.kfp_residual},
            {"inclusion_defect", d.inclusion_defect},
            {"min_density", d.min_density},
            {"last_increment", d.last_increment},
            {"outer_iters", d.outer_iters},
            {"converged", d.converged},
            {"hjb_converged", d.hjb_converged},
            {"peclet_warning", d.peclet_warning}};
}

bool picard_increments_diverging(std::span<const double> inc)
{
    const std::size_t n = inc.size();
    if (n < 6) return false;
    for (std::size_t i = n - 5; i < n; ++i)
        if (!(inc[i] > inc[i - 1])) return false;
    return inc[n - 1] >= 10.0 * inc[n - 6];
}

} // namespace mfgpdi
