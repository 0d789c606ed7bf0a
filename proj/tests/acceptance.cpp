// Acceptance suite. Usage: acceptance [criterion-id ...]; no arguments runs all.
// Prints one PASS/FAIL line per criterion; exit status 1 if any failed.

#include "mfgpdi/errors.hpp"
#include "mfgpdi/experiments.hpp"
#include "mfgpdi/kfp.hpp"
#include "mfgpdi/mfg_driver.hpp"
#include "mfgpdi/regularization.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace mfgpdi;

namespace {

struct Outcome {
    bool pass = true;
    std::ostringstream detail;

    void require(bool ok, const std::string& what)
    {
        if (!ok) {
            pass = false;
            detail << " [violated: " << what << "]";
        }
    }
};

const ScalarField kOne = [](double) { return 1.0; };

Hamiltonian control_hamiltonian()
{
    return Hamiltonian::from_controls({{-1.0, -0.5, 0.0, 0.5, 1.0},
                                       [](double x, double a) { return a * (1 + x) / 2; },
                                       [](double x, double a) { return a * a / 4 + x * a / 8; }},
                                      "control:tilted");
}

// same function without the closed-form tag, so prox takes the generic search
Hamiltonian generic_copy(const Hamiltonian& h)
{
    return {h.id() + "-generic", HamiltonianKind::Analytic, h.lipschitz(),
            [h](double x, double p) { return h(x, p); },
            [h](double x, double p) { return h.subdiff(x, p); }};
}

void c1_moreau_yosida(Outcome& o)
{
    const Hamiltonian abs = Hamiltonian::absolute();
    double worst_formula = 0.0, worst_gap_dev = 0.0;
    bool certified = true;
    for (double lambda : {1.0, 0.5, 0.2, 1.0 / 32, 1.0 / 1024}) {
        const auto my = moreau_yosida(abs, lambda);
        double gap = 0.0;
        for (int k = 0; k < 10000; ++k) {
            const double p = -5.0 + 10.0 * k / 9999.0;
            const double formula = std::abs(p) >= lambda ? std::abs(p) - lambda / 2 : p * p / (2 * lambda);
            worst_formula = std::max(worst_formula, std::abs(my.eval(0.5, p) - formula));
            gap = std::max(gap, std::abs(my.eval(0.5, p) - abs(0.5, p)));
        }
        worst_gap_dev = std::max(worst_gap_dev, std::abs(gap - lambda / 2));
        certified = certified && gap <= abs.lipschitz() * abs.lipschitz() * lambda / 2 + 1e-15 &&
                    my.omega() == lambda / 2;
    }
    o.detail << "max|H_l - formula|=" << worst_formula << " max|gap - l/2|=" << worst_gap_dev;
    o.require(worst_formula <= 1e-12, "formula to 1e-12");
    o.require(worst_gap_dev <= 1e-12, "gap equals lambda/2");
    o.require(certified, "gap <= L^2 lambda/2");
}

void c2_prox(Outcome& o)
{
    std::mt19937_64 rng(20240601);
    std::uniform_real_distribution<double> ux(0, 1), up(-5, 5), ul(1e-3, 1);
    double worst_ratio = 0.0;
    for (const Hamiltonian& h : {generic_copy(Hamiltonian::absolute()),
                                 generic_copy(Hamiltonian::weighted_absolute()), control_hamiltonian()}) {
        for (int t = 0; t < 1000; ++t) {
            const double x = ux(rng), p = up(rng), l = ul(rng);
            const double q = prox(h, x, l, p);
            const double r = l * h.lipschitz() + 1e-9;
            const int pts = 10000;
            const double step = 2 * r / (pts - 1);
            double best = 1e300, arg = p;
            for (int i = 0; i < pts; ++i) {
                const double z = p - r + i * step;
                const double v = h(x, z) + (z - p) * (z - p) / (2 * l);
                if (v < best) {
                    best = v;
                    arg = z;
                }
            }
            worst_ratio = std::max(worst_ratio, std::abs(q - arg) / step);
        }
    }
    o.detail << "max |prox - grid argmin| / grid step=" << worst_ratio;
    o.require(worst_ratio <= 2.0, "discrepancy <= 2 grid steps");
}

void c3_subgradients(Outcome& o)
{
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> ux(0, 1), up(-4, 4);
    double violation = 0.0, reg_violation = 0.0, dp_excess = 0.0, convexity = 0.0;
    for (const Hamiltonian& h : {Hamiltonian::absolute(), Hamiltonian::weighted_absolute(),
                                 Hamiltonian::clipped_quadratic(), control_hamiltonian()}) {
        for (int k = 0; k < 10000; ++k) {
            const double x = ux(rng), p = k % 5 == 0 ? 0.0 : up(rng), q = up(rng);
            const Interval s = h.subdiff(x, p);
            for (double b : {s.lo, s.hi, s.midpoint()})
                violation = std::max(violation, -(h(x, q) - h(x, p) - b * (q - p)));
        }
    }
    const MollifierSpec moll = MollifierSpec::cos_squared();
    for (double lambda : {0.5, 0.05}) {
        std::vector<RegularizedHamiltonian> regs = {
            moreau_yosida(Hamiltonian::absolute(), lambda), moreau_yosida(Hamiltonian::weighted_absolute(), lambda),
            moreau_yosida(control_hamiltonian(), lambda),    mollify(Hamiltonian::absolute(), lambda, moll),
            mollify(control_hamiltonian(), lambda, moll),     shifted_71(lambda),
            shifted_72(lambda)};
        for (const auto& reg : regs) {
            for (int k = 0; k < 10000; ++k) {
                const double x = ux(rng), p = up(rng), q = up(rng);
                const double b = reg.dp(x, p);
                // the mollified slope is a quadrature of H against rho', not a subgradient of the discrete sum
                if (reg.family() != RegularizationFamily::Mollified)
                    reg_violation = std::max(reg_violation, -(reg.eval(x, q) - reg.eval(x, p) - b * (q - p)));
                dp_excess = std::max(dp_excess, std::abs(b) - reg.base().lipschitz());
                convexity = std::max(convexity,
                                     reg.eval(x, 0.5 * (p + q)) - 0.5 * (reg.eval(x, p) + reg.eval(x, q)));
            }
        }
    }
    o.detail << "base violation=" << violation << " regularized violation=" << reg_violation
             << " max(|dp|-L_H)=" << dp_excess << " midpoint excess=" << convexity;
    o.require(violation <= 1e-10, "base subgradient inequality");
    o.require(reg_violation <= 1e-10, "regularized subgradient inequality");
    o.require(dp_excess <= 1e-12, "|dp| <= L_H");
    o.require(convexity <= 1e-12, "midpoint convexity");
}

void c4_nonmonotone(Outcome& o)
{
    ExperimentConfig cfg;
    cfg.experiment = "ex33";
    const Ex33Report r = run_ex33(cfg);
    double min_order = 1e300;
    for (double p : r.residual_orders_pair1) min_order = std::min(min_order, p);
    for (double p : r.residual_orders_pair2) min_order = std::min(min_order, p);
    o.detail << "min residual order=" << min_order << " separation_l2=" << r.separation_l2
             << " drift_check=" << r.drift_check;
    o.require(min_order >= 0.9, "residual order >= 0.9");
    o.require(r.separation_l2 > 0.0, "m1 != m2");
    o.require(r.drift_check == 0.0, "dH/dp(u_i') = u_i'");
    for (int start : {1, 2}) {
        std::vector<Ex33SolveRow> rows;
        for (const auto& s : r.solves)
            if (s.start == start) rows.push_back(s);
        if (!std::all_of(rows.begin(), rows.end(), [](const auto& s) { return s.converged; })) {
            o.detail << " start m" << start << ": iteration did not converge (flagged)";
            continue;
        }
        const double c = rows.front().err_h1 / rows.front().h;
        bool within = true, near = true;
        for (const auto& s : rows) {
            within = within && s.err_h1 <= c * s.h * (1 + 1e-9);
            near = near && s.approached == start;
        }
        o.detail << " start m" << start << ": C=" << c << " finest err=" << rows.back().err_h1;
        o.require(within, "H1 error <= C h (start m" + std::to_string(start) + ")");
        o.require(near, "run approaches pair " + std::to_string(start));
    }
}

void c5_oscillating(Outcome& o)
{
    ExperimentConfig cfg;
    cfg.experiment = "prop71";
    cfg.nu = 1.0;
    const Prop71Report r = run_prop71(cfg);
    bool monotone = true;
    for (std::size_t k = 1; k < r.rows.size(); ++k) monotone = monotone && r.rows[k].l2_error < r.rows[k - 1].l2_error;
    const Prop71Row& last = r.rows.back();
    const double ratio = last.h1_semi_error_sq / r.limit_value;
    double defect = 0.0;
    for (const auto& row : r.rows) defect = std::max(defect, row.inclusion_defect);
    o.detail << "j=" << last.j << " l2_error=" << last.l2_error << " h1_semi_sq/(1/840)=" << ratio
             << " max inclusion defect=" << defect;
    o.require(last.j == 512, "last j is 512");
    o.require(monotone, "L2 error decreasing in j");
    o.require(last.l2_error <= 0.02, "L2 error <= 0.02 at j=512");
    o.require(ratio >= 0.9 && ratio <= 1.1, "H1 seminorm error squared within 10% of 1/840");
    o.require(defect <= 1e-12, "inclusion defect <= 1e-12");
}

void c6_alternating(Outcome& o)
{
    ExperimentConfig cfg;
    cfg.experiment = "prop72";
    const Prop72Report r = run_prop72(cfg);
    bool exact = true;
    double spread = 0.0, defect = 0.0;
    for (const auto& row : r.rows) {
        exact = exact && row.drift_exact;
        spread = std::max(spread, row.parity_spread_l2);
        defect = std::max(defect, row.inclusion_defect);
    }
    const double h = 1.0 / double(r.n);
    const double oracle_gap = std::abs(r.across_parity_l2 - r.across_parity_oracle_l2);
    o.detail << "N=" << r.n << " within-parity spread=" << spread << " across-parity L2=" << r.across_parity_l2
             << " oracle=" << r.across_parity_oracle_l2 << " |diff|=" << oracle_gap;
    o.require(exact, "drift (-1)^{j+1} exactly at every Gauss point");
    o.require(spread <= 1e-8, "within-parity agreement 1e-8");
    o.require(r.across_parity_l2 > 0.05, "across-parity L2 distance > 0.05");
    o.require(oracle_gap <= h, "across-parity distance matches oracle to O(h)");
    o.require(defect <= 1e-12, "inclusion defect <= 1e-12");
}

void c7_rate(Outcome& o)
{
    for (const char* id : {"rate-my", "rate-mollify"}) {
        ExperimentConfig cfg;
        cfg.experiment = id;
        const RateReport r = run_rate(cfg);
        bool valid = true, bounded = true;
        for (const auto& row : r.rows) {
            valid = valid && row.valid;
            bounded = bounded && row.total() <= r.sqrt_constant * std::sqrt(row.omega) * (1 + 1e-12);
        }
        o.detail << ' ' << id << ": slope=" << r.slope << " C=" << r.sqrt_constant;
        o.require(valid && r.rows.size() == 9, std::string(id) + " all rows valid");
        o.require(r.slope >= 0.4, std::string(id) + " slope >= 0.4");
        o.require(bounded, std::string(id) + " err <= C omega^{1/2}");
    }
}

void c8_fem_orders(Outcome& o)
{
    const double pi = std::numbers::pi;
    const ScalarField u = [=](double x) { return std::sin(pi * x); };
    const ScalarField du = [=](double x) { return pi * std::cos(pi * x); };
    const ScalarField g_poisson = [=](double x) { return pi * pi * std::sin(pi * x); };
    // -m'' - (b m)' = g with b = 1
    const ScalarField g_adv = [=](double x) { return pi * pi * std::sin(pi * x) - pi * std::cos(pi * x); };
    std::vector<double> hs, p0, p1, a0, a1;
    for (std::size_t n : {32u, 64u, 128u, 256u, 512u}) {
        const MeshPtr m = Mesh1D::uniform(0, 1, n);
        const FeFunction up =
            FeFunction::from_interior(m, solve_linear(assemble_diffusion(*m, 1.0), load_vector(*m, g_poisson)));
        const FeFunction ua = solve_kfp(m, 1.0, kOne, g_adv).m;
        hs.push_back(m->max_h());
        p0.push_back(l2_error(up, u));
        p1.push_back(h1_seminorm_error(up, du));
        a0.push_back(l2_error(ua, u));
        a1.push_back(h1_seminorm_error(ua, du));
    }
    auto min_of = [](const std::vector<double>& v) { return *std::min_element(v.begin(), v.end()); };
    const double op0 = min_of(observed_orders(hs, p0)), op1 = min_of(observed_orders(hs, p1));
    const double oa0 = min_of(observed_orders(hs, a0)), oa1 = min_of(observed_orders(hs, a1));
    o.detail << "Poisson L2=" << op0 << " H1=" << op1 << "; advection-diffusion L2=" << oa0 << " H1=" << oa1;
    o.require(op0 >= 1.9 && oa0 >= 1.9, "L2 order >= 1.9");
    o.require(op1 >= 0.95 && oa1 >= 0.95, "H1 order >= 0.95");
}

void c9_uniqueness(Outcome& o)
{
    const MeshPtr m = Mesh1D::uniform(0, 1, 512);
    double worst = 0.0;
    for (int variant = 0; variant < 2; ++variant) {
        MfgConfig a, b;
        a.initial_m = InitialDensity::Zero;
        b.initial_m = interpolate(m, [](double x) { return 3 * std::sin(std::numbers::pi * x); });
        const auto solve = [&](const MfgConfig& c) {
            return variant == 0 ? solve_mfg(m, 1.0, moreau_yosida(Hamiltonian::absolute(), 0.1),
                                            CouplingSpec::identity(), kOne, c)
                                : solve_mfg(m, 1.0, Hamiltonian::absolute(), CouplingSpec::identity(), kOne, c);
        };
        const MfgSolution sa = solve(a), sb = solve(b);
        o.require(sa.diagnostics.converged && sb.diagnostics.converged, "identity runs converge");
        worst = std::max(worst, l2_distance(sa.m, sb.m));
    }
    o.detail << "identity: max L2 gap between starts=" << worst;
    o.require(worst <= 1e-6, "identity starts agree to 1e-6");

    const MeshPtr mm = Mesh1D::uniform(-1, 1, 256);
    const Ex33Oracle ex = oracle_ex33();
    const double exact_sep = l2_distance(interpolate(Mesh1D::uniform(-1, 1, 1 << 14), ex.m1),
                                         interpolate(Mesh1D::uniform(-1, 1, 1 << 14), ex.m2));
    MfgConfig c1, c2;
    c1.initial_m = interpolate(mm, [&](double x) { return 1.05 * ex.m1(x); });
    c2.initial_m = interpolate(mm, [&](double x) { return 1.05 * ex.m2(x); });
    const CouplingSpec f = ex33_coupling(mm);
    const MfgSolution l1 = solve_mfg(mm, 1.0, Hamiltonian::clipped_quadratic(), f, kOne, c1);
    const MfgSolution l2 = solve_mfg(mm, 1.0, Hamiltonian::clipped_quadratic(), f, kOne, c2);
    if (!l1.diagnostics.converged || !l2.diagnostics.converged) {
        o.detail << "; nonmonotone: iteration reported non-convergence";
        return;
    }
    const double sep = l2_distance(l1.m, l2.m);
    o.detail << "; nonmonotone: limit separation=" << sep << " vs 0.5*||m1-m2||=" << 0.5 * exact_sep;
    o.require(sep > 0.5 * exact_sep, "nonmonotone basins distinct");
}

struct Criterion {
    std::string name;
    double budget_s;
    std::function<void(Outcome&)> run;
};

} // namespace

int main(int argc, char** argv)
{
    const std::map<int, Criterion> criteria = {
        {1, {"Moreau-Yosida exactness", 1.0, c1_moreau_yosida}},
        {2, {"prox oracle equivalence", 10.0, c2_prox}},
        {3, {"subgradient property suite", 60.0, c3_subgradients}},
        {4, {"nonmonotone example reproduction", 30.0, c4_nonmonotone}},
        {5, {"oscillating shifted family", 120.0, c5_oscillating}},
        {6, {"alternating shifted family", 10.0, c6_alternating}},
        {7, {"rate study", 120.0, c7_rate}},
        {8, {"FEM order checks", 60.0, c8_fem_orders}},
        {9, {"uniqueness / nonuniqueness probes", 60.0, c9_uniqueness}},
    };
    std::vector<int> ids;
    for (int i = 1; i < argc; ++i) ids.push_back(std::atoi(argv[i]));
    if (ids.empty())
        for (const auto& [id, c] : criteria) ids.push_back(id);

    int failed = 0;
    for (int id : ids) {
        const auto it = criteria.find(id);
        if (it == criteria.end()) {
            std::printf("FAIL C%d unknown criterion\n", id);
            ++failed;
            continue;
        }
        const Criterion& c = it->second;
        Outcome o;
        const auto t0 = std::chrono::steady_clock::now();
        try {
            c.run(o);
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail << " [exception: " << e.what() << "]";
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (secs > c.budget_s) {
            o.pass = false;
            o.detail << " [over time budget " << c.budget_s << " s]";
        }
        std::printf("%s C%d %s (%.2f s): %s\n", o.pass ? "PASS" : "FAIL", id, c.name.c_str(), secs,
                    o.detail.str().c_str());
        if (!o.pass) ++failed;
    }
    return failed == 0 ? 0 : 1;
}
