#include "mfgpdi/experiments.hpp"
#include "mfgpdi/hjb.hpp"
#include "mfgpdi/kfp.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace mfgpdi;

namespace {

const ScalarField kOne = [](double) { return 1.0; };

double h1_err(const FeFunction& m, const ScalarField& f, double h = 1e-6)
{
    const ScalarField df = [&](double x) { return (f(x + h) - f(x - h)) / (2 * h); };
    return std::hypot(l2_error(m, f), h1_seminorm_error(m, df));
}

} // namespace

TEST(Kfp, ZeroDrift)
{
    const MeshPtr m = Mesh1D::uniform(0, 1, 100);
    const KfpResult r = solve_kfp(m, 1.0, [](double) { return 0.0; }, kOne);
    EXPECT_LE(h1_seminorm_error(r.m, [](double x) { return 0.5 - x; }), 0.01);
    EXPECT_GE(r.min_nodal_value, 0.0);
}

TEST(Kfp, ConstantDriftOrder)
{
    for (double b : {1.0, -1.0}) {
        const ScalarField exact = constant_drift_density(b, 1.0);
        EXPECT_NEAR(exact(0.0), 0.0, 1e-15);
        EXPECT_NEAR(exact(1.0), 0.0, 1e-15);
        std::vector<double> hs, errs;
        for (std::size_t n : {32u, 64u, 128u, 256u}) {
            const MeshPtr m = Mesh1D::uniform(0, 1, n);
            const KfpResult r = solve_kfp(m, 1.0, [b](double) { return b; }, kOne);
            hs.push_back(m->max_h());
            errs.push_back(h1_err(r.m, exact));
        }
        const double c = errs[0] / hs[0];
        for (std::size_t k = 0; k < hs.size(); ++k) EXPECT_LE(errs[k], 1.01 * c * hs[k]);
        for (double p : observed_orders(hs, errs)) EXPECT_GE(p, 0.95);
    }
    // the drift +1 density as stated in closed form
    const ScalarField m1 = constant_drift_density(1.0, 1.0);
    for (double x : {0.1, 0.5, 0.9})
        EXPECT_NEAR(m1(x), -x + (1 - std::exp(-x)) / (1 - std::exp(-1.0)), 1e-14);
}

TEST(Kfp, OscillatingDriftMatchesIntegralFormula)
{
    for (int j : {4, 16}) {
        const MeshPtr m = Mesh1D::uniform(0, 1, 20 * j);
        const KfpResult r = solve_kfp(m, 1.0, [j](double x) { return -x * std::cos(j * x); }, kOne);
        EXPECT_LE(l2_error(r.m, oscillating_drift_density(j, 1.0)), m->max_h() * m->max_h()) << j;
    }
}

TEST(Kfp, AdjointConsistency)
{
    const MeshPtr m = Mesh1D::uniform(0, 1, 50);
    const ScalarField b = [](double x) { return std::tanh(3 * x - 1); };
    const Tridiagonal k = assemble_kfp(*m, 0.4, b);
    const Tridiagonal hjb_lin = assemble_diffusion(*m, 0.4) + assemble_transport(*m, b);
    const Tridiagonal t = hjb_lin.transpose();
    for (std::size_t i = 0; i < k.size(); ++i) {
        EXPECT_NEAR(k.diag[i], t.diag[i], 1e-13);
        EXPECT_NEAR(k.upper[i], t.upper[i], 1e-13);
        EXPECT_NEAR(k.lower[i], t.lower[i], 1e-13);
    }
}

TEST(Kfp, NonnegativityAndPeclet)
{
    const MeshPtr m = Mesh1D::uniform(0, 1, 40);
    const ScalarField strong = [](double x) { return x < 0.5 ? 1.0 : -1.0; };
    // mesh Peclet 1/(2*40*0.01) > 1 without stabilization
    const KfpResult plain = solve_kfp(m, 0.01, strong, kOne);
    EXPECT_TRUE(plain.peclet_warning);
    EXPECT_GT(plain.max_mesh_peclet, 1.0);
    const KfpResult stab = solve_kfp(m, 0.01, strong, kOne, true);
    EXPECT_FALSE(stab.peclet_warning);
    EXPECT_GE(stab.min_nodal_value, -1e-12);
    const KfpResult resolved = solve_kfp(m, 1.0, strong, kOne);
    EXPECT_LT(resolved.max_mesh_peclet, 1.0);
    EXPECT_GE(resolved.min_nodal_value, -1e-12);
}

TEST(Kfp, LinearInSource)
{
    const MeshPtr m = Mesh1D::uniform(0, 1, 64);
    const ScalarField b = [](double x) { return std::sin(6 * x); };
    const ScalarField g1 = [](double x) { return x; }, g2 = [](double x) { return std::exp(-x); };
    const KfpResult r1 = solve_kfp(m, 0.5, b, g1), r2 = solve_kfp(m, 0.5, b, g2);
    const KfpResult r12 = solve_kfp(m, 0.5, b, [&](double x) { return g1(x) + g2(x); });
    for (std::size_t i = 0; i < m->num_nodes(); ++i)
        EXPECT_NEAR(r12.m.value(i), r1.m.value(i) + r2.m.value(i), 1e-13);
    EXPECT_LE(norm2(kfp_residual(*m, 0.5, b, r1.m, load_vector(*m, g1))), 1e-12);
}
