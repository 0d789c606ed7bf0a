#pragma once

#include "mfgpdi/fem.hpp"

#include <span>
#include <vector>

namespace mfgpdi {

struct KfpResult {
    FeFunction m;
    double min_nodal_value = 0.0;
    double max_mesh_peclet = 0.0; ///< max_e |b|_e h_e / (2 nu), before stabilization
    bool peclet_warning = false;  ///< unstabilized solve with mesh Peclet >= 1
};

/// nu (m', phi') + (m b, phi'), plus artificial diffusion
/// max(0, |b|_e h_e / 2 - nu) per element when `stabilize` is set.
[[nodiscard]] Tridiagonal assemble_kfp(const Mesh1D& mesh, double nu, const ScalarField& drift,
                                       bool stabilize = false);

[[nodiscard]] double max_mesh_peclet(const Mesh1D& mesh, double nu, const ScalarField& drift);

/// Solve the stationary Fokker-Planck equation for a given drift and load vector.
[[nodiscard]] KfpResult solve_kfp(const MeshPtr& mesh, double nu, const ScalarField& drift,
                                  std::span<const double> source, bool stabilize = false);

/// Same, with the source given as a function (G = 1 in the examples).
[[nodiscard]] KfpResult solve_kfp(const MeshPtr& mesh, double nu, const ScalarField& drift,
                                  const ScalarField& source, bool stabilize = false);

/// A m - source for the assembled KFP matrix.
[[nodiscard]] std::vector<double> kfp_residual(const Mesh1D& mesh, double nu,
                                               const ScalarField& drift, const FeFunction& m,
                                               std::span<const double> source,
                                               bool stabilize = false);

} // namespace mfgpdi
