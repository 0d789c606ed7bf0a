#include "mfgpdi/experiments.hpp"

#include "mfgpdi/errors.hpp"
#include "mfgpdi/hjb.hpp"
#include "mfgpdi/kfp.hpp"
#include "mfgpdi/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <iomanip>
#include <limits>
#include <memory>
#include <numbers>
#include <optional>
#include <ostream>
#include <sstream>

namespace mfgpdi {

namespace {

const std::vector<std::string> kExperiments = {"ex33", "prop71", "prop72", "rate-my",
                                               "rate-mollify"};

double one(double) { return 1.0; }

std::uint64_t fnv1a(std::string_view s)
{
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

double h1_error(const FeFunction& u, const ScalarField& f, const ScalarField& df)
{
    return std::hypot(l2_error(u, f), h1_seminorm_error(u, df));
}

// integral over [a, b] of f with an 8-point rule on each of `cells` cells
template <class F>
double integrate(F&& f, double a, double b, int cells)
{
    static const QuadratureRule rule = gauss_legendre(8);
    const double w = (b - a) / cells;
    double s = 0.0;
    for (int c = 0; c < cells; ++c) {
        const double mid = a + (c + 0.5) * w;
        for (std::size_t q = 0; q < rule.nodes.size(); ++q)
            s += rule.weights[q] * 0.5 * w * f(mid + 0.5 * w * rule.nodes[q]);
    }
    return s;
}

MfgConfig driver_config(const ExperimentConfig& cfg, double theta, double outer_tol, int max_outer)
{
    MfgConfig m;
    m.theta = cfg.theta > 0.0 ? cfg.theta : theta;
    m.outer_tol = cfg.outer_tol > 0.0 ? cfg.outer_tol : outer_tol;
    m.max_outer = cfg.max_outer > 0 ? cfg.max_outer : max_outer;
    return m;
}

double max_abs(const FeFunction& u)
{
    double r = 0.0;
    for (double v : u.values()) r = std::max(r, std::abs(v));
    return r;
}

} // namespace

void ExperimentConfig::validate() const
{
    if (std::find(kExperiments.begin(), kExperiments.end(), experiment) == kExperiments.end())
        throw InvalidArgument("unknown experiment '" + experiment + "'");
    if (n != 0 && n < 16) throw InvalidArgument("mesh resolution must be >= 16");
    for (std::size_t v : ns)
        if (v < 16) throw InvalidArgument("mesh resolution must be >= 16");
    if (!(nu > 0.0)) throw InvalidArgument("nu must be positive");
    if (quad_nodes < 3) throw InvalidArgument("quad_nodes must be >= 3");
}

nlohmann::json ExperimentConfig::to_json() const
{
    return {{"experiment", experiment}, {"n", n},           {"nu", nu},
            {"lambdas", lambdas},       {"js", js},         {"ns", ns},
            {"theta", theta},           {"outer_tol", outer_tol},
            {"max_outer", max_outer},   {"quad_nodes", quad_nodes}};
}

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j)
{
    ExperimentConfig c;
    c.experiment = j.value("experiment", std::string{});
    c.n = j.value("n", std::size_t{0});
    c.nu = j.value("nu", 1.0);
    c.lambdas = j.value("lambdas", std::vector<double>{});
    c.js = j.value("js", std::vector<int>{});
    c.ns = j.value("ns", std::vector<std::size_t>{});
    c.theta = j.value("theta", 0.0);
    c.outer_tol = j.value("outer_tol", 0.0);
    c.max_outer = j.value("max_outer", 0);
    c.quad_nodes = j.value("quad_nodes", 64);
    if (j.contains("out")) c.out = j.at("out").get<std::string>();
    return c;
}

std::string ExperimentConfig::hash() const
{
    std::ostringstream s;
    s << std::hex << std::setw(16) << std::setfill('0') << fnv1a(to_json().dump());
    return s.str();
}

std::vector<double> observed_orders(const std::vector<double>& h, const std::vector<double>& err)
{
    std::vector<double> out;
    for (std::size_t k = 0; k + 1 < std::min(h.size(), err.size()); ++k)
        out.push_back(std::log(err[k] / err[k + 1]) / std::log(h[k] / h[k + 1]));
    return out;
}

// ----------------------------------------------------------------------------
// nonmonotone example

Ex33Oracle oracle_ex33()
{
    Ex33Oracle o;
    o.u1 = [](double x) { return 0.5 * (1.0 - x * x); };
    o.du1 = [](double x) { return -x; };
    o.m1 = [](double x) { return -std::expm1(0.5 * (x * x - 1.0)); };
    o.dm1 = [](double x) { return -x * std::exp(0.5 * (x * x - 1.0)); };
    o.u2 = [](double x) { return 0.5 * (x * x - 1.0); };
    o.du2 = [](double x) { return x; };
    o.m2 = [](double x) { return std::expm1(0.5 * (1.0 - x * x)); };
    o.dm2 = [](double x) { return -x * std::exp(0.5 * (1.0 - x * x)); };
    return o;
}

CouplingSpec ex33_coupling(const MeshPtr& mesh)
{
    const Ex33Oracle o = oracle_ex33();
    return CouplingSpec::nonmonotone(interpolate(mesh, o.m1), interpolate(mesh, o.m2));
}

Ex33Report run_ex33(const ExperimentConfig& cfg)
{
    const Ex33Oracle o = oracle_ex33();
    const Hamiltonian ham = Hamiltonian::clipped_quadratic();
    const GradientNonlinearity g = nonlinearity(ham);
    const double nu = 1.0;
    std::vector<std::size_t> ns = cfg.ns;
    if (ns.empty() && cfg.n != 0) ns = {cfg.n};
    if (ns.empty()) ns = {128, 256, 512, 1024};

    Ex33Report rep;
    std::vector<double> hs, r1, r2;
    for (std::size_t n : ns) {
        const MeshPtr mesh = Mesh1D::uniform(o.a, o.b, n);
        const CouplingSpec coupling = ex33_coupling(mesh);
        const std::vector<double> g_load = load_vector(*mesh, one);
        auto pair_residual = [&](const ScalarField& u, const ScalarField& m) {
            const FeFunction uh = interpolate(mesh, u);
            const FeFunction mh = interpolate(mesh, m);
            const double rh = norm2(hjb_residual(*mesh, nu, g, uh, coupling.apply(mh)));
            const double rk = norm2(kfp_residual(*mesh, nu, realized_drift(uh, g), mh, g_load));
            return std::hypot(rh, rk);
        };
        Ex33ResidualRow row;
        row.n = n;
        row.h = mesh->max_h();
        row.residual_pair1 = pair_residual(o.u1, o.m1);
        row.residual_pair2 = pair_residual(o.u2, o.m2);
        rep.residuals.push_back(row);
        hs.push_back(row.h);
        r1.push_back(row.residual_pair1);
        r2.push_back(row.residual_pair2);
    }
    rep.residual_orders_pair1 = observed_orders(hs, r1);
    rep.residual_orders_pair2 = observed_orders(hs, r2);

    rep.separation_l2 = std::sqrt(integrate(
        [&](double x) { return std::pow(o.m1(x) - o.m2(x), 2); }, o.a, o.b, 1 << 14));

    for (int k = 0; k <= 2000; ++k) {
        const double x = o.a + (o.b - o.a) * k / 2000.0;
        rep.drift_check = std::max(rep.drift_check, std::abs(g.slope(x, o.du1(x)) - o.du1(x)));
        rep.drift_check = std::max(rep.drift_check, std::abs(g.slope(x, o.du2(x)) - o.du2(x)));
    }

    for (std::size_t n : ns) {
        const MeshPtr mesh = Mesh1D::uniform(o.a, o.b, n);
        const CouplingSpec coupling = ex33_coupling(mesh);
        for (int start : {1, 2}) {
            const ScalarField& ms = start == 1 ? o.m1 : o.m2;
            MfgConfig mc = driver_config(cfg, 0.5, 1e-10, 500);
            mc.initial_m = interpolate(mesh, [&ms](double x) { return 1.05 * ms(x); });
            Ex33SolveRow row;
            row.n = n;
            row.h = mesh->max_h();
            row.start = start;
            try {
                const MfgSolution sol = solve_mfg(mesh, nu, ham, coupling, one, mc);
                row.converged = sol.diagnostics.converged;
                row.outer_iters = sol.diagnostics.outer_iters;
                row.dist_m1_l2 = l2_error(sol.m, o.m1);
                row.dist_m2_l2 = l2_error(sol.m, o.m2);
                row.approached = row.dist_m1_l2 <= row.dist_m2_l2 ? 1 : 2;
                row.err_h1 = start == 1 ? h1_error(sol.u, o.u1, o.du1) + h1_error(sol.m, o.m1, o.dm1)
                                        : h1_error(sol.u, o.u2, o.du2) + h1_error(sol.m, o.m2, o.dm2);
                rep.inclusion_defect = std::max(rep.inclusion_defect, sol.diagnostics.inclusion_defect);
            } catch (const Diverged&) {
                row.converged = false;
                row.err_h1 = row.dist_m1_l2 = row.dist_m2_l2 = std::numeric_limits<double>::quiet_NaN();
            }
            rep.solves.push_back(row);
        }
    }
    return rep;
}

nlohmann::json Ex33Report::to_json() const
{
    nlohmann::json res = nlohmann::json::array();
    for (const auto& r : residuals)
        res.push_back({{"n", r.n}, {"h", r.h}, {"residual_pair1", r.residual_pair1},
                       {"residual_pair2", r.residual_pair2}});
    nlohmann::json sol = nlohmann::json::array();
    for (const auto& r : solves)
        sol.push_back({{"n", r.n},
                       {"h", r.h},
                       {"start", r.start},
                       {"converged", r.converged},
                       {"outer_iters", r.outer_iters},
                       {"dist_m1_l2", r.dist_m1_l2},
                       {"dist_m2_l2", r.dist_m2_l2},
                       {"err_h1", r.err_h1},
                       {"approached", r.approached}});
    return {{"experiment", "ex33"},
            {"residuals", res},
            {"residual_orders_pair1", residual_orders_pair1},
            {"residual_orders_pair2", residual_orders_pair2},
            {"separation_l2", separation_l2},
            {"drift_check", drift_check},
            {"inclusion_defect", inclusion_defect},
            {"solves", sol}};
}

void Ex33Report::write_csv(std::ostream& out, const std::string& config_hash) const
{
    out << std::setprecision(17);
    out << "n,h,residual_pair1,residual_pair2,start,converged,dist_m1_l2,dist_m2_l2,err_h1,config_hash\n";
    for (const auto& r : residuals)
        for (const auto& s : solves)
            if (s.n == r.n)
                out << r.n << ',' << r.h << ',' << r.residual_pair1 << ',' << r.residual_pair2 << ','
                    << s.start << ',' << (s.converged ? 1 : 0) << ',' << s.dist_m1_l2 << ','
                    << s.dist_m2_l2 << ',' << s.err_h1 << ',' << config_hash << '\n';
}

// ----------------------------------------------------------------------------
// closed-form densities on (0, 1), G = 1

ScalarField constant_drift_density(double b, double nu)
{
    if (b == 0.0) return [nu](double x) { return x * (1.0 - x) / (2.0 * nu); };
    // m = -x/b + (1 - e^{-bx/nu}) / (b (1 - e^{-b/nu}))
    return [b, nu](double x) {
        return -x / b + std::expm1(-b * x / nu) / (b * std::expm1(-b / nu));
    };
}

ScalarField oscillating_drift_density(int j, double nu)
{
    if (j < 1) throw InvalidArgument("oscillating_drift_density: j must be >= 1");
    const double jd = j;
    auto gamma = [jd, nu](double s) {
        return std::exp(-(s * std::sin(jd * s) / jd + std::cos(jd * s) / (jd * jd)) / nu);
    };
    const int cells = 32 * j;
    auto i0 = std::make_shared<std::vector<double>>(cells + 1, 0.0);
    auto i1 = std::make_shared<std::vector<double>>(cells + 1, 0.0);
    for (int c = 0; c < cells; ++c) {
        const double lo = double(c) / cells, hi = double(c + 1) / cells;
        (*i0)[c + 1] = (*i0)[c] + integrate(gamma, lo, hi, 1);
        (*i1)[c + 1] = (*i1)[c] + integrate([&](double s) { return s * gamma(s); }, lo, hi, 1);
    }
    const double ratio = i1->back() / i0->back();
    return [=](double x) {
        x = std::clamp(x, 0.0, 1.0);
        const int c = std::min(cells - 1, int(x * cells));
        const double lo = double(c) / cells;
        const double a0 = (*i0)[c] + integrate(gamma, lo, x, 1);
        const double a1 = (*i1)[c] + integrate([&](double s) { return s * gamma(s); }, lo, x, 1);
        return (ratio * a0 - a1) / (nu * gamma(x));
    };
}

// ----------------------------------------------------------------------------
// oscillating shifted family

Prop71Report run_prop71(const ExperimentConfig& cfg)
{
    std::vector<int> js = cfg.js;
    if (js.empty()) js = {8, 16, 32, 64, 128, 256, 512};
    for (int j : js)
        if (j < 8 || j > 512) throw InvalidArgument("prop71: j must lie in {8, ..., 512}");
    const int jmax = *std::max_element(js.begin(), js.end());
    if (cfg.n != 0 && cfg.n < std::size_t(20) * std::size_t(jmax))
        throw MeshTooCoarse("prop71: N must be at least 20 max(j) = " + std::to_string(20 * jmax));

    const double nu = cfg.nu;
    Prop71Report rep;
    rep.limit_value = 1.0 / (840.0 * std::pow(nu, 4));
    const Hamiltonian base = Hamiltonian::weighted_absolute();
    const ScalarField m_lim = constant_drift_density(0.0, nu);
    const ScalarField dm_lim = [nu](double x) { return (1.0 - 2.0 * x) / (2.0 * nu); };

    for (int j : js) {
        const std::size_t n = cfg.n != 0 ? cfg.n : std::size_t(20) * std::size_t(j);
        const MeshPtr mesh = Mesh1D::uniform(0.0, 1.0, n);
        const RegularizedHamiltonian reg = shifted_71(1.0 / j);
        const MfgSolution sol =
            solve_mfg(mesh, nu, reg, CouplingSpec::zero(), one, driver_config(cfg, 1.0, 1e-10, 50));
        Prop71Row row;
        row.j = j;
        row.lambda = 1.0 / j;
        row.n = n;
        row.l2_error = l2_error(sol.m, m_lim);
        row.h1_semi_error_sq = std::pow(h1_seminorm_error(sol.m, dm_lim), 2);
        row.oracle_l2 = l2_error(sol.m, oscillating_drift_density(j, nu));
        row.u_max_abs = max_abs(sol.u);
        row.inclusion_defect = sol.diagnostics.inclusion_defect;
        row.base_inclusion_defect = pdi_inclusion_defect(sol.u, sol.drift, base);
        row.converged = sol.diagnostics.converged;
        row.outer_iters = sol.diagnostics.outer_iters;
        rep.rows.push_back(row);
    }
    return rep;
}

nlohmann::json Prop71Report::to_json() const
{
    nlohmann::json rs = nlohmann::json::array();
    for (const auto& r : rows)
        rs.push_back({{"j", r.j},
                      {"lambda", r.lambda},
                      {"n", r.n},
                      {"l2_error", r.l2_error},
                      {"h1_semi_error_sq", r.h1_semi_error_sq},
                      {"oracle_l2", r.oracle_l2},
                      {"u_max_abs", r.u_max_abs},
                      {"inclusion_defect", r.inclusion_defect},
                      {"base_inclusion_defect", r.base_inclusion_defect},
                      {"converged", r.converged},
                      {"outer_iters", r.outer_iters}});
    return {{"experiment", "prop71"}, {"limit_value", limit_value}, {"rows", rs}};
}

void Prop71Report::write_csv(std::ostream& out, const std::string& config_hash) const
{
    out << std::setprecision(17);
    out << "j,lambda,n,l2_error,h1_semi_error_sq,limit_value,oracle_l2,converged,config_hash\n";
    for (const auto& r : rows)
        out << r.j << ',' << r.lambda << ',' << r.n << ',' << r.l2_error << ',' << r.h1_semi_error_sq
            << ',' << limit_value << ',' << r.oracle_l2 << ',' << (r.converged ? 1 : 0) << ','
            << config_hash << '\n';
}

// ----------------------------------------------------------------------------
// alternating shifted family

Prop72Report run_prop72(const ExperimentConfig& cfg)
{
    std::vector<int> js = cfg.js;
    if (js.empty()) js = {1, 2, 3, 4, 5, 6, 7, 8};
    for (int j : js)
        if (j < 1 || j > 16) throw InvalidArgument("prop72: j must lie in {1, ..., 16}");

    const double nu = cfg.nu;
    Prop72Report rep;
    rep.n = cfg.n != 0 ? cfg.n : 512;
    const MeshPtr mesh = Mesh1D::uniform(0.0, 1.0, rep.n);
    const Hamiltonian base = Hamiltonian::absolute();
    std::optional<FeFunction> first_odd, first_even;

    for (int j : js) {
        const double lambda = 1.0 / (std::numbers::pi * j);
        const RegularizedHamiltonian reg = shifted_72(lambda);
        const MfgSolution sol =
            solve_mfg(mesh, nu, reg, CouplingSpec::zero(), one, driver_config(cfg, 1.0, 1e-10, 50));
        Prop72Row row;
        row.j = j;
        row.lambda = lambda;
        row.expected_drift = j % 2 == 1 ? 1.0 : -1.0;
        row.drift_exact = true;
        for (std::size_t e = 0; e < mesh->num_elements(); ++e)
            for (double xq : mesh->gauss_points(e))
                if (sol.drift(xq) != row.expected_drift) row.drift_exact = false;
        row.oracle_l2 = l2_error(sol.m, constant_drift_density(row.expected_drift, nu));
        std::optional<FeFunction>& first = j % 2 == 1 ? first_odd : first_even;
        if (!first) first = sol.m;
        row.parity_spread_l2 = l2_distance(sol.m, *first);
        row.u_max_abs = max_abs(sol.u);
        row.inclusion_defect = sol.diagnostics.inclusion_defect;
        row.base_inclusion_defect = pdi_inclusion_defect(sol.u, sol.drift, base);
        row.converged = sol.diagnostics.converged;
        row.outer_iters = sol.diagnostics.outer_iters;
        rep.rows.push_back(row);
    }
    if (first_odd && first_even) rep.across_parity_l2 = l2_distance(*first_odd, *first_even);
    const ScalarField mp = constant_drift_density(1.0, nu), mm = constant_drift_density(-1.0, nu);
    rep.across_parity_oracle_l2 =
        std::sqrt(integrate([&](double x) { return std::pow(mp(x) - mm(x), 2); }, 0.0, 1.0, 4096));
    return rep;
}

nlohmann::json Prop72Report::to_json() const
{
    nlohmann::json rs = nlohmann::json::array();
    for (const auto& r : rows)
        rs.push_back({{"j", r.j},
                      {"lambda", r.lambda},
                      {"expected_drift", r.expected_drift},
                      {"drift_exact", r.drift_exact},
                      {"oracle_l2", r.oracle_l2},
                      {"parity_spread_l2", r.parity_spread_l2},
                      {"u_max_abs", r.u_max_abs},
                      {"inclusion_defect", r.inclusion_defect},
                      {"base_inclusion_defect", r.base_inclusion_defect},
                      {"converged", r.converged},
                      {"outer_iters", r.outer_iters}});
    return {{"experiment", "prop72"},
            {"n", n},
            {"across_parity_l2", across_parity_l2},
            {"across_parity_oracle_l2", across_parity_oracle_l2},
            {"rows", rs}};
}

void Prop72Report::write_csv(std::ostream& out, const std::string& config_hash) const
{
    out << std::setprecision(17);
    out << "j,lambda,expected_drift,drift_exact,oracle_l2,parity_spread_l2,across_parity_l2,config_hash\n";
    for (const auto& r : rows)
        out << r.j << ',' << r.lambda << ',' << r.expected_drift << ',' << (r.drift_exact ? 1 : 0)
            << ',' << r.oracle_l2 << ',' << r.parity_spread_l2 << ',' << across_parity_l2 << ','
            << config_hash << '\n';
}

// ----------------------------------------------------------------------------
// rate studies

RateReport run_rate(const ExperimentConfig& cfg)
{
    RegularizationFamily family;
    if (cfg.experiment == "rate-my")
        family = RegularizationFamily::MoreauYosida;
    else if (cfg.experiment == "rate-mollify")
        family = RegularizationFamily::Mollified;
    else
        throw InvalidArgument("run_rate: experiment must be rate-my or rate-mollify");

    std::vector<double> lambdas = cfg.lambdas;
    if (lambdas.empty())
        for (int k = 2; k <= 10; ++k) lambdas.push_back(std::ldexp(1.0, -k));
    const std::size_t n = cfg.n != 0 ? cfg.n : 4096;
    const MeshPtr mesh = Mesh1D::uniform(0.0, 1.0, n);
    const Hamiltonian base = Hamiltonian::absolute();
    const CouplingSpec coupling = CouplingSpec::identity();

    MfgConfig ref_cfg = driver_config(cfg, 0.5, 1e-12, 500);
    ref_cfg.outer_tol = std::min(ref_cfg.outer_tol, 1e-12);
    const MfgSolution reference = solve_mfg(mesh, cfg.nu, base, coupling, one, ref_cfg);
    if (!reference.diagnostics.converged)
        throw NonConvergence("run_rate: reference solve did not converge");
    return rate_study(mesh, cfg.nu, base, family, coupling, one, lambdas, reference,
                      driver_config(cfg, 0.5, 1e-10, 500), cfg.quad_nodes);
}

} // namespace mfgpdi
