#include "mfgpdi/errors.hpp"
#include "mfgpdi/kfp.hpp"
#include "mfgpdi/mfg_driver.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <sstream>

using namespace mfgpdi;

namespace {

const ScalarField kOne = [](double) { return 1.0; };

} // namespace

TEST(MfgDriver, AlternatingShiftDecouples)
{
    const MeshPtr m = Mesh1D::uniform(0, 1, 128);
    MfgConfig cfg;
    cfg.theta = 1.0;
    for (int j : {1, 2, 5}) {
        const MfgSolution s = solve_mfg(m, 1.0, shifted_72(1 / (std::numbers::pi * j)),
                                        CouplingSpec::zero(), kOne, cfg);
        EXPECT_TRUE(s.diagnostics.converged);
        EXPECT_LE(s.diagnostics.outer_iters, 2);
        for (double v : s.u.values()) EXPECT_EQ(v, 0.0);
        const double b = j % 2 == 1 ? 1.0 : -1.0;
        const KfpResult direct = solve_kfp(m, 1.0, [b](double) { return b; }, kOne);
        EXPECT_LE(l2_distance(s.m, direct.m), 1e-14);
        EXPECT_LE(s.diagnostics.inclusion_defect, 1e-12);
    }
}

TEST(MfgDriver, OscillatingShiftDecouples)
{
    const int j = 8;
    const MeshPtr m = Mesh1D::uniform(0, 1, 20 * j);
    MfgConfig cfg;
    cfg.theta = 1.0;
    const MfgSolution s = solve_mfg(m, 1.0, shifted_71(1.0 / j), CouplingSpec::zero(), kOne, cfg);
    EXPECT_TRUE(s.diagnostics.converged);
    for (double v : s.u.values()) EXPECT_EQ(v, 0.0);
    for (double x : {0.1, 0.4, 0.77}) EXPECT_NEAR(s.drift(x), -x * std::cos(j * x), 1e-15);
}

TEST(MfgDriver, IdentityCouplingInvariants)
{
    const MeshPtr m = Mesh1D::uniform(0, 1, 256);
    MfgConfig cfg;
    const auto reg = moreau_yosida(Hamiltonian::absolute(), 0.1);
    const MfgSolution s = solve_mfg(m, 1.0, reg, CouplingSpec::identity(), kOne, cfg);
    ASSERT_TRUE(s.diagnostics.converged);
    EXPECT_LE(s.diagnostics.hjb_residual, 10 * cfg.hjb.tol_residual);
    EXPECT_LE(s.diagnostics.kfp_residual, 1e-10);
    EXPECT_GE(s.diagnostics.min_density, -1e-12);
    EXPECT_EQ(s.lambda.value(), 0.1);
    // drift is dp at the realized gradient
    for (std::size_t e = 0; e < m->num_elements(); e += 17)
        for (double x : m->gauss_points(e)) EXPECT_EQ(s.drift(x), reg.dp(x, s.u.derivative(x)));

    // one more outer step from the converged pair
    MfgConfig again = cfg;
    again.initial_m = s.m;
    again.max_outer = 1;
    const MfgSolution t = solve_mfg(m, 1.0, reg, CouplingSpec::identity(), kOne, again);
    EXPECT_LE(l2_distance(t.m, s.m), 2 * cfg.outer_tol);

    // half-mesh cross-check
    const MeshPtr coarse = Mesh1D::uniform(0, 1, 128);
    const MfgSolution c = solve_mfg(coarse, 1.0, reg, CouplingSpec::identity(), kOne, cfg);
    EXPECT_LE(std::abs(l2_norm(c.m) - l2_norm(s.m)), 1e-4);

    // two initial guesses agree
    MfgConfig zero_start = cfg;
    zero_start.initial_m = InitialDensity::Zero;
    const MfgSolution z = solve_mfg(m, 1.0, reg, CouplingSpec::identity(), kOne, zero_start);
    EXPECT_LE(l2_distance(z.m, s.m), 1e-6);
}

TEST(MfgDriver, NonsmoothSystem)
{
    const MeshPtr m = Mesh1D::uniform(0, 1, 256);
    const MfgSolution s = solve_mfg(m, 1.0, Hamiltonian::absolute(), CouplingSpec::identity(), kOne);
    ASSERT_TRUE(s.diagnostics.converged);
    EXPECT_FALSE(s.lambda.has_value());
    EXPECT_EQ(s.diagnostics.inclusion_defect, 0.0);
    EXPECT_EQ(pdi_inclusion_defect(s.u, s.drift, Hamiltonian::absolute()), 0.0);
}

TEST(MfgDriver, InclusionDefect)
{
    const MeshPtr m = Mesh1D::uniform(0, 1, 16);
    const FeFunction zero = FeFunction::zero(m);
    const Hamiltonian abs = Hamiltonian::absolute();
    EXPECT_EQ(pdi_inclusion_defect(zero, [](double) { return 1.0; }, abs), 0.0);
    EXPECT_DOUBLE_EQ(pdi_inclusion_defect(zero, [](double) { return 1.5; }, abs), 0.5);
    const FeFunction u = interpolate(m, [](double x) { return std::sin(6 * x) * x * (1 - x); });
    const ScalarField sel = realized_drift(u, nonlinearity(abs));
    EXPECT_EQ(pdi_inclusion_defect(u, sel, abs), 0.0);
}

TEST(MfgDriver, IterationLimitFlag)
{
    const MeshPtr m = Mesh1D::uniform(0, 1, 64);
    MfgConfig cfg;
    cfg.max_outer = 2;
    cfg.theta = 0.1;
    const MfgSolution s = solve_mfg(m, 1.0, moreau_yosida(Hamiltonian::absolute(), 0.1),
                                    CouplingSpec::scaled(5.0), kOne, cfg);
    EXPECT_FALSE(s.diagnostics.converged);
    EXPECT_EQ(s.diagnostics.outer_iters, 2);
    cfg.theta = 0.0;
    EXPECT_THROW((void)solve_mfg(m, 1.0, Hamiltonian::absolute(), CouplingSpec::zero(), kOne, cfg),
                 InvalidArgument);
}

TEST(MfgDriver, DivergenceRule)
{
    const std::vector<double> growing = {1.0, 0.5, 1.0, 2.0, 3.0, 4.0, 5.5};
    EXPECT_TRUE(picard_increments_diverging(growing));
    // five increases but less than tenfold
    const std::vector<double> mild = {1.0, 1.1, 1.2, 1.3, 1.4, 1.5};
    EXPECT_FALSE(picard_increments_diverging(mild));
    // tenfold but one step is flat
    const std::vector<double> flat = {0.1, 0.2, 0.4, 0.4, 0.8, 1.6};
    EXPECT_FALSE(picard_increments_diverging(flat));
    EXPECT_FALSE(picard_increments_diverging(std::vector<double>{0.1, 1.0, 10.0}));
}

TEST(RateStudy, SlopeAndCsv)
{
    const MeshPtr m = Mesh1D::uniform(0, 1, 512);
    MfgConfig ref_cfg;
    ref_cfg.outer_tol = 1e-12;
    const Hamiltonian abs = Hamiltonian::absolute();
    const MfgSolution ref = solve_mfg(m, 1.0, abs, CouplingSpec::identity(), kOne, ref_cfg);
    const std::vector<double> lambdas = {0.25, 0.0625, 1.0 / 64, 1.0 / 256};
    const RateReport r = rate_study(m, 1.0, abs, RegularizationFamily::MoreauYosida,
                                    CouplingSpec::identity(), kOne, lambdas, ref);
    ASSERT_EQ(r.rows.size(), 4u);
    for (const RateRow& row : r.rows) {
        EXPECT_TRUE(row.valid);
        EXPECT_DOUBLE_EQ(row.omega, row.lambda / 2);
    }
    EXPECT_GE(r.slope, 0.4);
    for (std::size_t k = 0; k + 1 < r.rows.size(); ++k)
        EXPECT_LE(r.rows[k + 1].total(), 2 * r.sqrt_constant * std::sqrt(r.rows[k].omega));

    std::ostringstream csv;
    r.write_csv(csv, "abc");
    EXPECT_EQ(csv.str().substr(0, csv.str().find('\n')), "lambda,omega,err_u_h1,err_m_l2,slope,config_hash");
    EXPECT_EQ(r.to_json().at("rows").size(), 4u);

    const std::vector<double> increasing = {0.1, 0.2};
    EXPECT_THROW((void)rate_study(m, 1.0, abs, RegularizationFamily::MoreauYosida,
                                  CouplingSpec::identity(), kOne, increasing, ref),
                 InvalidArgument);
}

TEST(RateStudy, InactiveRegularization)
{
    // coupling zero: u = 0, so the realized gradient stays at p = 0 where
    // H_lambda and H agree together with their slopes
    const MeshPtr m = Mesh1D::uniform(0, 1, 64);
    const Hamiltonian q = Hamiltonian::clipped_quadratic();
    const MfgSolution ref = solve_mfg(m, 1.0, q, CouplingSpec::zero(), kOne);
    const std::vector<double> lambdas = {0.5, 0.1};
    const RateReport r = rate_study(m, 1.0, q, RegularizationFamily::MoreauYosida,
                                    CouplingSpec::zero(), kOne, lambdas, ref);
    for (const RateRow& row : r.rows) EXPECT_LE(row.total(), 1e-14);
}

TEST(LogLogFit, ExactPowerLaw)
{
    const std::vector<double> x = {1, 2, 4, 8}, y = {3, 3 * std::sqrt(2.0), 6, 6 * std::sqrt(2.0)};
    EXPECT_NEAR(fit_loglog_slope(x, y), 0.5, 1e-14);
}
