#include "mfgpdi/kfp.hpp"

#include "mfgpdi/errors.hpp"

#include <algorithm>
#include <cmath>

namespace mfgpdi {

namespace {

double element_drift_bound(const Mesh1D& mesh, std::size_t e, const ScalarField& drift)
{
    double b = 0.0;
    for (double xq : mesh.gauss_points(e)) b = std::max(b, std::abs(drift(xq)));
    return b;
}

} // namespace

double max_mesh_peclet(const Mesh1D& mesh, double nu, const ScalarField& drift)
{
    double pe = 0.0;
    for (std::size_t e = 0; e < mesh.num_elements(); ++e)
        pe = std::max(pe, element_drift_bound(mesh, e, drift) * mesh.h(e) / (2.0 * nu));
    return pe;
}

Tridiagonal assemble_kfp(const Mesh1D& mesh, double nu, const ScalarField& drift, bool stabilize)
{
    if (!(nu > 0.0)) throw InvalidArgument("KFP: nu must be positive");
    std::vector<double> nu_e(mesh.num_elements(), nu);
    if (stabilize) {
        for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
            const double b = element_drift_bound(mesh, e, drift);
            nu_e[e] += std::max(0.0, b * mesh.h(e) / 2.0 - nu);
        }
    }
    return assemble_diffusion(mesh, nu_e) + assemble_advection(mesh, drift);
}

KfpResult solve_kfp(const MeshPtr& mesh, double nu, const ScalarField& drift,
                    std::span<const double> source, bool stabilize)
{
    if (source.size() != mesh->num_interior()) throw MeshMismatch("solve_kfp: source size mismatch");
    const Tridiagonal a = assemble_kfp(*mesh, nu, drift, stabilize);
    FeFunction m = FeFunction::from_interior(mesh, solve_linear(a, source));
    KfpResult result{std::move(m), 0.0, max_mesh_peclet(*mesh, nu, drift), false};
    const auto values = result.m.values();
    result.min_nodal_value = *std::min_element(values.begin(), values.end());
    result.peclet_warning = !stabilize && result.max_mesh_peclet >= 1.0;
    return result;
}

KfpResult solve_kfp(const MeshPtr& mesh, double nu, const ScalarField& drift,
                    const ScalarField& source, bool stabilize)
{
    return solve_kfp(mesh, nu, drift, load_vector(*mesh, source), stabilize);
}

std::vector<double> kfp_residual(const Mesh1D& mesh, double nu, const ScalarField& drift,
                                 const FeFunction& m, std::span<const double> source,
                                 bool stabilize)
{
    std::vector<double> r = assemble_kfp(mesh, nu, drift, stabilize).apply(m.interior());
    for (std::size_t i = 0; i < r.size(); ++i) r[i] -= source[i];
    return r;
}

} // namespace mfgpdi
